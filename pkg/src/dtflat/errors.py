"""Exception types.  Every error carries a stable ``code`` string."""


class DtflatError(Exception):
    code = "ERROR"

    def __init__(self, message="", code=None, **info):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.info = info


class ExprError(DtflatError):
    code = "EXPR_ERROR"


class ParseError(ExprError):
    """Raised on malformed expression text; ``position`` is a 0-based offset."""

    code = "SYNTAX_ERROR"

    def __init__(self, message, position=None, code=None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message, code=code)
        self.position = position


class EvaluationError(ExprError):
    code = "SINGULAR_POINT"


class ChartMismatch(DtflatError):
    code = "CHART_MISMATCH"


class GeometryError(DtflatError):
    code = "GEOMETRY_ERROR"


class ModelError(DtflatError):
    code = "SYSTEM_ERROR"


class EliminationError(DtflatError):
    code = "DEGREE_CAP_EXCEEDED"


class IntegrationFailed(DtflatError):
    code = "INTEGRATION_FAILED"


class VerificationError(DtflatError):
    code = "RESIDUAL_EXCEEDED"


class InputError(DtflatError):
    """Malformed system or hints file; ``line`` is 1-based."""

    code = "INPUT_ERROR"

    def __init__(self, message, line=None, code=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, code=code)
        self.line = line
