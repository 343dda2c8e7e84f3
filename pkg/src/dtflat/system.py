"""Sampled-data systems ``x_next = f(x, u)``."""

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import EvaluationError, GeometryError, ModelError
from .expr import ONE, ZERO, Expr, as_expr
from .field_linalg import nullspace, rank, rref, solve_linear
from .geometry import Chart, Distribution, VectorField, is_involutive


class SampledSystem:
    """Immutable model: state names, input names and the update map."""

    def __init__(self, states, inputs, f, allow_no_inputs=False):
        states, inputs = tuple(states), tuple(inputs)
        if isinstance(f, dict):
            missing = [x for x in states if x not in f]
            if missing:
                raise ModelError(f"no update equation for {missing}", code="INPUT_ERROR")
            f = [f[x] for x in states]
        f = tuple(as_expr(fi) for fi in f)
        if not states:
            raise ModelError("a system needs at least one state", code="INPUT_ERROR")
        if not inputs and not allow_no_inputs:
            raise ModelError("a system needs at least one input", code="INPUT_ERROR")
        if len(f) != len(states):
            raise ModelError("one update equation per state is required", code="INPUT_ERROR")
        names = states + inputs
        if len(set(names)) != len(names):
            raise ModelError("state and input names must be distinct", code="INPUT_ERROR")
        known = set(names)
        for x, fi in zip(states, f):
            extra = [v for v in fi.free_symbols if v not in known]
            if extra:
                raise ModelError(f"equation for {x} uses unknown symbols {extra}", code="INPUT_ERROR")
        self.states = states
        self.inputs = inputs
        self.f = f
        self.chart = Chart(names)
        self.state_chart = Chart(states)
        self.shift_names = _shift_names(states, known)
        self.shifted_chart = Chart(self.shift_names)

    @property
    def n(self):
        return len(self.states)

    @property
    def m(self):
        return len(self.inputs)

    def equations(self):
        return dict(zip(self.states, self.f))

    def jacobian(self, wrt=None):
        wrt = self.chart.names if wrt is None else wrt
        return [[fi.diff(v) for v in wrt] for fi in self.f]

    def relabel(self, mapping):
        """Rename states/inputs (``mapping`` old -> new)."""
        new_states = [mapping.get(x, x) for x in self.states]
        new_inputs = [mapping.get(u, u) for u in self.inputs]
        sub = {k: Expr.symbol(v) for k, v in mapping.items()}
        return SampledSystem(new_states, new_inputs, [fi.subs(sub) for fi in self.f])

    def transform_inputs(self, bindings, new_inputs=None):
        """Substitute ``u = phi(x, v)`` given as ``bindings``."""
        new_inputs = self.inputs if new_inputs is None else tuple(new_inputs)
        return SampledSystem(self.states, new_inputs, [fi.subs(bindings) for fi in self.f])

    def __str__(self):
        lines = [f"states: {' '.join(self.states)}", f"inputs: {' '.join(self.inputs)}"]
        lines += [f"next {x} = {fi}" for x, fi in zip(self.states, self.f)]
        return "\n".join(lines)

    def __repr__(self):
        return f"SampledSystem(states={list(self.states)}, inputs={list(self.inputs)})"


def _shift_names(states, taken):
    for suffix in ("_1", "_next", "_s1"):
        names = tuple(f"{x}{suffix}" for x in states)
        if not set(names) & set(taken):
            return names
    raise ModelError("cannot build names for the shifted chart")


# --------------------------------------------------------------------------
# sampling helpers shared with the numeric verifier

def random_rational(rng, bound=10):
    while True:
        p = rng.randint(-bound, bound)
        q = rng.randint(1, bound)
        if p:
            return Fraction(p, q)


def random_point(names, rng, exprs=(), bound=10, tries=200):
    """Random rational point avoiding poles of ``exprs``."""
    for _ in range(tries):
        pt = {n: random_rational(rng, bound) for n in names}
        try:
            for e in exprs:
                e.eval_at(pt)
        except EvaluationError:
            continue
        return pt
    raise EvaluationError("could not find a regular sample point")


def numeric_rank(matrix, point):
    vals = [[x.eval_at(point) for x in row] for row in matrix]
    return rank([[Expr.const(v) for v in row] for row in vals])


# --------------------------------------------------------------------------

def validate(sys, samples=10, seed=42):
    """Check that ``f`` is a submersion; return singular-locus warnings."""
    J = sys.jacobian()
    r = rank(J)
    if r < sys.n:
        raise ModelError(
            f"Jacobian of f has generic rank {r} < {sys.n}", code="NOT_SUBMERSION"
        )
    warnings = []
    rng = random.Random(seed)
    for _ in range(samples):
        pt = random_point(sys.chart.names, rng, sys.f)
        try:
            if numeric_rank(J, pt) < r:
                warnings.append(f"rank drop of the Jacobian at {_fmt_point(pt)}")
        except EvaluationError:
            continue
    return warnings


def _fmt_point(pt):
    return "{" + ", ".join(f"{k}: {v}" for k, v in pt.items()) + "}"


@dataclass(frozen=True)
class InputSplit:
    effective: tuple
    redundant: tuple
    values: dict
    reduced: SampledSystem

    @property
    def m_effective(self):
        return len(self.effective)


def split_redundant(sys):
    """Separate effective inputs from redundant ones (column pivoting on d_u f)."""
    Ju = sys.jacobian(sys.inputs)
    _, pivots = rref(Ju)
    eff_idx = sorted(c for _, c in pivots)
    effective = tuple(sys.inputs[i] for i in eff_idx)
    redundant = tuple(u for u in sys.inputs if u not in effective)
    if not redundant:
        return InputSplit(effective, (), {}, sys)
    target = len(effective)
    for value in range(0, 20):
        vals = {u: Expr.const(value) for u in redundant}
        f = [fi.subs(vals) for fi in sys.f]
        try:
            reduced = SampledSystem(sys.states, effective, f, allow_no_inputs=True)
        except ModelError:
            continue
        if rank(reduced.jacobian(effective)) == target and rank(reduced.jacobian()) == sys.n:
            return InputSplit(effective, redundant, {u: value for u in redundant}, reduced)
    raise ModelError("no admissible constant for the redundant inputs", code="NOT_SUBMERSION")


def kernel_distribution(sys, check=True):
    """``K = {v : v(f^i) = 0}`` on the (x, u) chart."""
    ker = nullspace(sys.jacobian())
    K = Distribution(sys.chart, [VectorField(sys.chart, v) for v in ker])
    if check and not is_involutive(K):
        raise GeometryError("kernel distribution is not involutive")
    return K


def input_distribution(sys):
    return Distribution.coordinate(sys.chart, sys.inputs)


def lift(sys, field):
    """Embed a field on the state chart into the (x, u) chart."""
    return VectorField.from_dict(sys.chart, dict(zip(field.chart.names, field.coeffs)))


def pushforward_matrix(sys, fields):
    """``F[i][j] = fields[j](f^i)``."""
    return [[v.apply(fi) for v in fields] for fi in sys.f]


def push_forward(sys, fields, rows, F=None):
    """Normalized push-forward of ``fields`` through ``f``.

    ``rows`` are state indices (the f_b selection), one per field.  The family
    is recombined so that the f_b block becomes the identity; field ``j`` is
    mapped onto ``d/dx_next[rows[j]]``.  Returns vector fields on the shifted
    chart whose coefficients are functions of (x, u).
    """
    k = len(fields)
    if len(rows) != k:
        raise GeometryError("need one row per field", code="FB_SINGULAR")
    F = pushforward_matrix(sys, fields) if F is None else F
    Fb = [F[i] for i in rows]
    # solve Fb * M = I for M
    inv_cols = []
    for j in range(k):
        e = [ONE if i == j else ZERO for i in range(k)]
        col = solve_linear(Fb, e)
        if col is None:
            raise GeometryError(
                f"F_b for rows {[sys.states[i] for i in rows]} is singular",
                code="FB_SINGULAR",
            )
        inv_cols.append(col)
    out = []
    for j in range(k):
        coeffs = []
        for i in range(sys.n):
            if i in rows:
                coeffs.append(ONE if rows.index(i) == j else ZERO)
            else:
                coeffs.append(sum((F[i][l] * inv_cols[j][l] for l in range(k)), ZERO))
        out.append(VectorField(sys.shifted_chart, coeffs))
    return out


class NotShiftInvariant(GeometryError):
    code = "NOT_SHIFT_INVARIANT"


def shift_back(sys, xi, max_degree=None):
    """Rewrite a shifted-chart field with coefficients in (x, u) on the state chart.

    Raises :class:`NotShiftInvariant` when a coefficient does not factor
    through ``f`` and :class:`~dtflat.errors.EliminationError` when the search
    is inconclusive within the degree cap.
    """
    from .elimination import factor_through

    kwargs = {} if max_degree is None else {"max_degree": max_degree}
    znames = list(sys.states)
    coeffs = []
    for c in xi.coeffs:
        if c.is_constant():
            coeffs.append(c)
            continue
        G = factor_through(c, list(sys.f), znames, **kwargs)
        if G is None:
            raise NotShiftInvariant(f"coefficient {c} does not factor through f")
        coeffs.append(G)
    return VectorField(sys.state_chart, coeffs)


def row_subsets(sys, size, fields=None, exclude=(), F=None):
    """Candidate f_b row selections: lowest degree of the selected rows first,
    ties resolved towards later rows."""
    avail = [i for i in range(sys.n) if i not in exclude]
    if F is None and fields is not None:
        F = pushforward_matrix(sys, fields)

    def score(sub):
        deg = 0
        if F is not None:
            for i in sub:
                for x in F[i]:
                    deg += x.complexity() if not x.is_zero() else 0
        return (deg, tuple(-i for i in sorted(sub, reverse=True)))

    return sorted(combinations(avail, size), key=score)


__all__ = [
    "SampledSystem",
    "InputSplit",
    "validate",
    "split_redundant",
    "kernel_distribution",
    "input_distribution",
    "push_forward",
    "pushforward_matrix",
    "shift_back",
    "lift",
    "row_subsets",
    "NotShiftInvariant",
    "random_point",
    "random_rational",
]
