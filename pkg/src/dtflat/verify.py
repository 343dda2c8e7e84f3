"""Numeric cross-checks: rollouts, parametrization residuals, output window ranks."""

import random
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, InputError, VerificationError
from .expr import Expr, as_expr
from .field_linalg import rank
from .system import random_point, random_rational

RANK_THRESHOLD = 1e-8
RESIDUAL_THRESHOLD = 1e-9
_COMPLEX_STEP = 1e-30

_YNAME = re.compile(r"^y(\d+)_(\d+)$")


# --------------------------------------------------------------------------
# simulation

@dataclass
class Trajectory:
    states: list
    inputs: list

    def __len__(self):
        return len(self.states)

    def pairs(self):
        return list(zip(self.states, self.inputs))


def _as_point(names, value, what):
    if isinstance(value, dict):
        missing = [n for n in names if n not in value]
        if missing:
            raise InputError(f"{what} misses values for {missing}")
        return [value[n] for n in names]
    value = list(value)
    if len(value) != len(names):
        raise InputError(f"{what} needs {len(names)} values, got {len(value)}")
    return value


def simulate(sys, x0, inputs, steps=None):
    """Roll out ``x(i+1) = f(x(i), u(i))``.

    Exact for int/Fraction data, floating otherwise.  ``inputs`` is a list of
    input points (dicts or sequences), or a single point held constant.
    """
    if steps is None:
        steps = len(inputs)
    if isinstance(inputs, dict) or (inputs and not isinstance(inputs[0], (dict, list, tuple))):
        inputs = [inputs] * steps
    if len(inputs) < steps:
        raise InputError(f"{steps} steps need {steps} input points, got {len(inputs)}")
    x = _as_point(sys.states, x0, "initial state")
    xs, us = [x], []
    for i in range(steps):
        u = _as_point(sys.inputs, inputs[i], f"input at step {i}")
        pt = dict(zip(sys.states, x))
        pt.update(zip(sys.inputs, u))
        try:
            x = [fi.eval_at(pt) for fi in sys.f]
        except EvaluationError as exc:
            raise EvaluationError(f"step {i}: {exc}", code="SINGULAR_POINT", step=i) from None
        xs.append(x)
        us.append(u)
    return Trajectory(xs, us)


# --------------------------------------------------------------------------
# parametrizations

def yname(i, k):
    """Name of the ``k``-th shift of output ``i`` (1-based)."""
    return f"y{i}_{k}"


def _shift_y(e, by=1):
    names = e.free_symbols
    sub = {}
    for n in names:
        m = _YNAME.match(n)
        if m:
            sub[n] = Expr.symbol(yname(int(m.group(1)), int(m.group(2)) + by))
    return e.subs(sub)


@dataclass
class Parametrization:
    """``(x, u) = (H_x(y), H_u(y))`` in the variables ``y{i}_{k}``.

    ``r[i]`` is the number of shifts of output ``i+1`` needed by ``H_u``;
    ``H_x`` may use shifts up to ``r[i]-1``.
    """

    r: tuple
    Hx: tuple
    Hu: tuple

    def __post_init__(self):
        self.r = tuple(int(v) for v in self.r)
        self.Hx = tuple(as_expr(e) for e in self.Hx)
        self.Hu = tuple(as_expr(e) for e in self.Hu)
        if any(v < 1 for v in self.r):
            raise InputError("every r_i must be at least 1")
        for part, top in (("H_x", -1), ("H_u", 0)):
            for e in getattr(self, part.replace("_", "")):
                for name in e.free_symbols:
                    m = _YNAME.match(name)
                    if not m:
                        raise InputError(f"{part} uses {name}, not a flat-output variable")
                    i, k = int(m.group(1)), int(m.group(2))
                    if not 1 <= i <= len(self.r):
                        raise InputError(f"{part} uses {name} but there are {len(self.r)} outputs")
                    if k > self.r[i - 1] + top:
                        raise InputError(f"{part} uses {name} beyond its admissible shift")

    @property
    def m(self):
        return len(self.r)

    def head(self):
        return [yname(i + 1, 0) for i in range(self.m)]

    def tail(self):
        return [yname(i + 1, r) for i, r in enumerate(self.r)]

    def variables(self, extra=0):
        return [yname(i + 1, k) for i, r in enumerate(self.r) for k in range(r + 1 + extra)]


@dataclass
class ParametrizationReport:
    residual_max: float
    symbolic_ok: bool
    fact1_rank: int
    fact2_rank: int
    head_free: bool
    points: int
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.residual_max < RESIDUAL_THRESHOLD and self.symbolic_ok is not False


def _pullback_f(sys, H):
    bind = dict(zip(sys.states, H.Hx))
    bind.update(zip(sys.inputs, H.Hu))
    return [fi.subs(bind) for fi in sys.f]


def check_parametrization(sys, H, trials=100, seed=42, threshold=RESIDUAL_THRESHOLD):
    """Check ``sigma(H_x) = f(H_x, H_u)`` and the generic rank facts.

    Raises ``RANK_FACT_VIOLATED`` or ``RESIDUAL_EXCEEDED``; returns the report
    otherwise.
    """
    if len(H.Hx) != sys.n or len(H.Hu) != sys.m or H.m != sys.m:
        raise InputError("parametrization does not match the system dimensions")
    head, tail = H.head(), H.tail()
    fact1 = rank([[h.diff(y) for y in head] for h in H.Hx])
    fact2 = rank([[h.diff(y) for y in tail] for h in H.Hu])
    if fact1 != sys.m:
        raise VerificationError(
            f"rank of d(H_x)/d(y_h) is {fact1}, expected {sys.m}", code="RANK_FACT_VIOLATED"
        )
    if fact2 < 1:
        raise VerificationError("H_u does not depend on the top shifts", code="RANK_FACT_VIOLATED")

    lhs = [_shift_y(h) for h in H.Hx]
    rhs = _pullback_f(sys, H)
    notes = []
    try:
        symbolic_ok = all((a - b).is_zero() for a, b in zip(lhs, rhs))
    except Exception as exc:  # substitution hit a vanishing denominator
        symbolic_ok = None
        notes.append(f"symbolic check skipped: {exc}")
    head_free = all(not e.depends_on(y) for e in rhs for y in head)
    if symbolic_ok and not head_free:
        raise VerificationError("H*(f) depends on the head variables", code="RANK_FACT_VIOLATED")

    rng = random.Random(seed)
    names = H.variables(extra=1)
    worst = 0.0
    exprs = list(lhs) + list(rhs)
    used = 0
    while used < trials:
        pt = random_point(names, rng, exprs)
        fpt = {k: float(v) for k, v in pt.items()}
        try:
            for a, b in zip(lhs, rhs):
                va, vb = a.eval_at(fpt), b.eval_at(fpt)
                worst = max(worst, abs(va - vb) / max(1.0, abs(va), abs(vb)))
        except EvaluationError:
            continue
        used += 1
    report = ParametrizationReport(worst, symbolic_ok, fact1, fact2, head_free, used, notes)
    if worst >= threshold or symbolic_ok is False:
        raise VerificationError(
            f"residual {worst:.3e} over {used} points", code="RESIDUAL_EXCEEDED", report=report
        )
    return report


# --------------------------------------------------------------------------
# output window rank

@dataclass
class OutputRankReport:
    window: int
    rank: int
    required: int
    points: int
    singular_points: int = 0

    @property
    def rank_ok(self):
        return self.rank == self.required


def _compile(e, names):
    """Closure evaluating ``e`` on a sequence of values ordered like ``names``."""
    idx = [names.index(v) for v in e.num.gens] if not e.num.is_const() else []
    didx = [names.index(v) for v in e.den.gens] if not e.den.is_const() else []
    num, den = e.num, e.den

    def run(vals):
        n = num.evaluate({g: vals[i] for g, i in zip(num.gens, idx)}) if idx else num.evaluate({})
        d = den.evaluate({g: vals[i] for g, i in zip(den.gens, didx)}) if didx else den.evaluate({})
        if abs(d) < 1e-300:
            raise EvaluationError("pole")
        return n / d

    return run


def _window_map(sys, outputs, w):
    """``(x0, u_0..u_w) -> (phi(x_k, u_k))_{k<=w}`` as a callable on flat vectors."""
    names = list(sys.chart.names)
    fs = [_compile(fi, names) for fi in sys.f]
    phis = [_compile(y, names) for y in outputs]
    n, m = sys.n, sys.m

    def run(z):
        x = list(z[:n])
        out = []
        for k in range(w + 1):
            u = list(z[n + k * m:n + (k + 1) * m])
            vals = x + u
            out.extend(p(vals) for p in phis)
            if k < w:
                x = [f(vals) for f in fs]
        return out

    return run


def _svd_rank(M, scale):
    if M.size == 0 or scale == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > RANK_THRESHOLD * scale))


def _recovered_rank(run, z, k):
    """Complex-step Jacobian; rank contributed by the first ``k`` coordinates."""
    z = np.asarray(z, dtype=complex)
    cols = []
    for j in range(len(z)):
        zz = z.copy()
        zz[j] += 1j * _COMPLEX_STEP
        cols.append([v.imag / _COMPLEX_STEP for v in run(list(zz))])
    J = np.array(cols, dtype=float).T
    if not np.all(np.isfinite(J)):
        raise EvaluationError("non-finite Jacobian entry")
    # row equilibration on the full matrix; round-off residue of exact zeros is dropped
    norms = np.linalg.norm(J, axis=1)
    norms[norms == 0] = 1.0
    J = J / norms[:, None]
    J[np.abs(J) < 1e-13] = 0.0
    scale = np.linalg.svd(J, compute_uv=False)[0] if J.size else 0.0
    return _svd_rank(J, scale) - _svd_rank(J[:, k:], scale)


def _sample_z(sys, w, rng, run):
    size = sys.n + (w + 1) * sys.m
    for _ in range(200):
        z = [float(random_rational(rng)) for _ in range(size)]
        try:
            vals = run(z)
        except (EvaluationError, ZeroDivisionError, OverflowError):
            continue
        if all(np.isfinite(v) for v in vals):
            return z
    raise EvaluationError("could not find a regular sample point")


def check_flat_outputs_numeric(sys, outputs, trials=100, seed=42, max_window=None):
    """Local injectivity of ``(x0, u0) -> output window``.

    The window grows from 0 to ``n+1`` shifts until the output samples
    determine all ``n+m`` coordinates of ``(x0, u0)``; raises ``RANK_DEFICIENT``
    when no window does.
    """
    outputs = [as_expr(y) for y in outputs]
    if len(outputs) != sys.m:
        raise InputError(f"expected {sys.m} outputs, got {len(outputs)}")
    need = sys.n + sys.m
    max_window = sys.n + 1 if max_window is None else max_window
    best = 0
    for w in range(max_window + 1):
        run = _window_map(sys, outputs, w)
        rng = random.Random(seed)
        low, used, singular = need, 0, 0
        while used < trials:
            z = _sample_z(sys, w, rng, run)
            try:
                r = _recovered_rank(run, z, need)
                if r < need:
                    # a drop that vanishes under a small perturbation is a
                    # point on the singular locus, not a generic deficiency
                    jitter = [v * (1 + 1e-3 * rng.uniform(-1, 1)) + 1e-3 * rng.uniform(-1, 1) for v in z]
                    rj = _recovered_rank(run, jitter, need)
                    if rj > r:
                        singular += 1
                        r = rj
            except (EvaluationError, ZeroDivisionError, OverflowError):
                continue
            used += 1
            low = min(low, r)
            if low < need:
                break
        best = max(best, low)
        if low == need:
            return OutputRankReport(w, low, need, used, singular)
    raise VerificationError(
        f"outputs determine only {best} of {need} coordinates within {max_window} shifts",
        code="RANK_DEFICIENT",
        rank=best,
    )


__all__ = [
    "Trajectory",
    "simulate",
    "Parametrization",
    "ParametrizationReport",
    "check_parametrization",
    "OutputRankReport",
    "check_flat_outputs_numeric",
    "yname",
]
