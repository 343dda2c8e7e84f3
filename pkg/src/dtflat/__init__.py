"""Forward-shift flatness of discrete-time systems ``x_next = f(x, u)``."""

from .errors import (
    ChartMismatch,
    DtflatError,
    EliminationError,
    EvaluationError,
    ExprError,
    GeometryError,
    InputError,
    IntegrationFailed,
    ModelError,
    ParseError,
    VerificationError,
)
from .expr import ONE, ZERO, Expr, as_expr, parse, sym, symbols
from .geometry import (
    Chart,
    CovectorField,
    Distribution,
    VectorField,
    adjusted_basis,
    annihilator,
    cauchy_characteristic,
    is_involutive,
    is_symmetry,
    lie_bracket,
)
from .system import (
    InputSplit,
    SampledSystem,
    input_distribution,
    kernel_distribution,
    push_forward,
    shift_back,
    split_redundant,
    validate,
)
from .elimination import PolyIdeal, build_h, factor_through, groebner
from .flatness import (
    FLAT,
    INCONCLUSIVE,
    NOT_FLAT,
    FlatnessReport,
    construct,
    decompose_series,
    extract_first_integrals,
    flat_outputs,
    normalize_flat_outputs,
    test_flat,
)
from .verify import (
    Parametrization,
    Trajectory,
    check_flat_outputs_numeric,
    check_parametrization,
    simulate,
)
from .kernels import BACKEND

__version__ = "0.1.0"

import types as _types

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, _types.ModuleType)
)
