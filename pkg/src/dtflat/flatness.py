"""Flatness of sampled-data systems.

Two procedures live here:

* ``test_flat`` decides flatness with distributions only.  Each pass peels
  off the input directions that can be moved to a Brunovsky chain, pushes
  them one step through ``f`` and shifts them back to the state space.
* ``construct`` performs the decomposition into a Brunovsky block plus a
  complement at the level of functions and recurses on the complement.

Flat outputs for a FLAT verdict are recovered by ``extract_first_integrals``
followed by ``normalize_flat_outputs``; both are best-effort searches over a
rational ansatz and never change the verdict.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .elimination import (
    DEFAULT_ANSATZ_DEGREE,
    DEFAULT_ELIM_DEGREE,
    DegreeCapExceeded,
    build_h,
    factor_through,
    tilde_names,
)
from .errors import EliminationError, GeometryError, IntegrationFailed, ModelError
from .expr import ZERO, Expr, as_expr
from .field_linalg import rank
from .geometry import (
    Distribution,
    VectorField,
    annihilator,
    complement,
    contract,
    intersection,
    lie_bracket,
    sum_of,
)
from .poly import Poly
from .qlinalg import integer_vector, nullspace_q, rref_q, solve_q
from .system import (
    NotShiftInvariant,
    SampledSystem,
    input_distribution,
    kernel_distribution,
    lift,
    push_forward,
    pushforward_matrix,
    shift_back,
    split_redundant,
    validate,
)

FLAT = "FLAT"
NOT_FLAT = "NOT_FLAT"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_EXTRACT_DEGREE = 3


@dataclass
class IterationTrace:
    index: int
    Y_S: Distribution
    U_S: Distribution
    V_S: Distribution
    Uhat: Distribution
    kappa_before: int
    kappa_after: int
    fb_rows: list = field(default_factory=list)
    shifted_fields: list = field(default_factory=list)


@dataclass
class FlatnessReport:
    verdict: str
    system: SampledSystem
    traces: list
    R_final: Distribution
    Y_final: Distribution
    K: Distribution
    redundant_inputs: tuple = ()
    flat_outputs: list = None
    extraction_status: str = "SKIPPED"
    notes: list = field(default_factory=list)

    @property
    def passes(self):
        return len(self.traces)

    @property
    def is_flat(self):
        return self.verdict == FLAT


# --------------------------------------------------------------------------
# distribution-level test

def check_condition_full(sys):
    """``[U, K]`` inside ``U + K``: all inputs can feed one Brunovsky block."""
    U = input_distribution(sys)
    K = kernel_distribution(sys)
    UK = sum_of(U, K)
    return all(UK.contains(lie_bracket(u, k)) for u in U.generators for k in K.basis())


def _combine(chart, coeffs, basis):
    out = VectorField(chart, [ZERO] * chart.dim)
    for c, g in zip(coeffs, basis):
        if not c.is_zero():
            out = out + g.scale(c)
    return out


def find_Uhat(U_S, R, K):
    """Largest ``W`` inside ``U_S`` with ``[W + R, K]`` inside ``W + R + K``.

    Decreasing fixed point; for ``v = sum c_i g_i`` the derivative terms of
    the bracket lie in ``W`` already, so each step is a linear problem in
    the ``c_i``.
    """
    chart = U_S.chart
    W = U_S.basis()
    RK = sum_of(R, K)
    kbasis = K.basis()
    while W:
        omegas = annihilator(RK.extend(W))
        if not omegas:
            break
        rows = []
        for k in kbasis:
            brs = [lie_bracket(g, k) for g in W]
            for w in omegas:
                rows.append([contract(b, w) for b in brs])
        if all(x.is_zero() for r in rows for x in r):
            break
        from .field_linalg import nullspace

        sols = nullspace(rows)
        if len(sols) == len(W):
            break
        W = [_combine(chart, c, W).primitive() for c in sols]
    return Distribution(chart, W)


def detect_redundant_stage(A_S, R, K):
    """Split ``A_S`` into ``Y_S = A_S & (R + K)`` and a complement ``U_S``."""
    Y_S = intersection(A_S, sum_of(R, K))
    U_S = complement(A_S, Y_S)
    return Y_S, U_S


def _sorted_subsets(avail, size, F, cols, hint):
    def score(sub):
        deg = 0
        for i in sub:
            for j in cols:
                x = F[i][j]
                if not x.is_zero():
                    deg += x.complexity() + 1
        hinted = 0 if hint and set(sub) <= set(hint) else 1
        return (hinted, deg, tuple(-i for i in sorted(sub, reverse=True)))

    return sorted(combinations(avail, size), key=score)


def _attempt(sys, fields, rows, k, F, caps):
    try:
        xi = push_forward(sys, fields, list(rows), F)
    except GeometryError as exc:
        if getattr(exc, "code", None) == "FB_SINGULAR":
            return None
        raise
    out = []
    for v in xi[:k]:
        back = shift_back(sys, v, **caps)
        out.append(lift(sys, back).primitive())
    return out


def _project(sys, uhat, R_rows, caps, hint):
    """Images of ``uhat`` under push-forward plus shift-back.

    Returns ``(rows, fields)`` or raises :class:`DegreeCapExceeded` when every
    admissible row selection hit the cap; ``None`` if nothing worked.
    """
    k = len(uhat)
    olds = list(reversed(R_rows))
    fields = uhat + [f for f, _ in olds]
    sticky = [r for _, r in olds]
    F = pushforward_matrix(sys, fields)
    capped = None
    ucols = list(range(k))
    tried = set()

    def run(rows, flds, FF):
        nonlocal capped
        key = (tuple(rows), len(flds))
        if key in tried:
            return None
        tried.add(key)
        try:
            return _attempt(sys, flds, rows, k, FF, caps)
        except NotShiftInvariant:
            return None
        except DegreeCapExceeded as exc:
            capped = exc
            return None

    free = [i for i in range(sys.n) if i not in sticky]
    for sub in _sorted_subsets(free, k, F, ucols, hint):
        rows = list(sub) + sticky
        res = run(rows, fields, F)
        if res is not None:
            return rows, res
    # fallback: any rows for the previously added fields
    if olds:
        for sub in _sorted_subsets(range(sys.n), k, F, ucols, hint):
            rest = [i for i in range(sys.n) if i not in sub]
            for osub in combinations(rest, len(olds)):
                for perm in _perms(osub):
                    rows = list(sub) + list(perm)
                    res = run(rows, fields, F)
                    if res is not None:
                        return rows, res
        Fu = [row[:k] for row in F]
        for sub in _sorted_subsets(range(sys.n), k, F, ucols, hint):
            res = run(list(sub), uhat, Fu)
            if res is not None:
                return list(sub), res
    if capped is not None:
        raise capped
    return None


def _perms(seq):
    from itertools import permutations

    return permutations(seq)


def test_flat(sys, max_elim_degree=DEFAULT_ELIM_DEGREE, ansatz_degree=DEFAULT_ANSATZ_DEGREE,
              fb_hint=None):
    """Distribution-based flatness test; returns a :class:`FlatnessReport`."""
    validate(sys, samples=0)
    split = split_redundant(sys)
    work = split.reduced
    chart = work.chart
    K = kernel_distribution(work)
    A_S = input_distribution(work)
    R = Distribution(chart)
    Y = Distribution(chart)
    R_rows = []
    kappa = work.n
    traces = []
    notes = []
    caps = {"max_degree": max_elim_degree}
    hint = None
    if fb_hint:
        hint = [work.states.index(x) for x in fb_hint if x in work.states]
    empty = Distribution(chart)
    verdict = None
    index = 0
    while verdict is None:
        index += 1
        Y_S, U_S = detect_redundant_stage(A_S, R, K)
        Y = sum_of(Y, Y_S) if Y_S.generators else Y
        if kappa == 0:
            traces.append(IterationTrace(index, Y_S, U_S, empty, empty, 0, 0))
            verdict = FLAT
            break
        uhat = find_Uhat(U_S, R, K)
        if uhat.rank == 0:
            traces.append(IterationTrace(index, Y_S, U_S, U_S, uhat, kappa, kappa))
            verdict = NOT_FLAT
            break
        ubasis = uhat.basis()
        V_S = complement(U_S, uhat)
        try:
            res = _project(work, ubasis, R_rows, caps, hint)
        except DegreeCapExceeded as exc:
            notes.append(f"pass {index}: elimination cap reached ({exc})")
            res = "cap"
        if res is None or res == "cap":
            if res is None:
                notes.append(f"pass {index}: no row selection gave shift-invariant fields")
            traces.append(IterationTrace(index, Y_S, U_S, V_S, uhat, kappa, kappa))
            verdict = INCONCLUSIVE
            break
        rows, shifted = res
        k = len(ubasis)
        if len(rows) > k:
            olds = list(reversed(R_rows))
            R_rows = list(reversed(list(zip([f for f, _ in olds], rows[k:]))))
        R_rows = R_rows + list(zip(ubasis, rows[:k]))
        R = sum_of(R, uhat)
        A_S = Distribution(chart, shifted + list(V_S.generators))
        traces.append(IterationTrace(
            index, Y_S, U_S, V_S, uhat, kappa, kappa - k,
            [work.states[i] for i in rows], shifted,
        ))
        kappa -= k
    return FlatnessReport(verdict, work, traces, R, Y, K, split.redundant, notes=notes)


test_flat.__test__ = False


# --------------------------------------------------------------------------
# ansatz helpers shared by the integral and normalization searches

def _monomials(names, degree, exact=False):
    out = []
    n = len(names)
    rng = [degree] if exact else range(degree + 1)
    from itertools import combinations_with_replacement

    for d in rng:
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(Poly(names, {tuple(e): 1}))
    return out


def _poly_dict(e):
    """Polynomial Expr -> {monomial key: Fraction}."""
    e = as_expr(e)
    if not e.den.is_const():
        raise ValueError("expected a polynomial")
    d = e.den.const_value()
    out = {}
    for exps, c in e.num.terms.items():
        key = tuple((g, k) for g, k in zip(e.num.gens, exps) if k)
        out[key] = Fraction(c, d)
    return out


def _coefficient_rows(columns, rhs=None):
    """Coefficient matching: ``sum_j x_j columns[j] == rhs`` (polynomials)."""
    dicts = [_poly_dict(c) for c in columns]
    rdict = _poly_dict(rhs) if rhs is not None else {}
    keys = set(rdict)
    for d in dicts:
        keys.update(d)
    keys = sorted(keys)
    rows = [[d.get(k, Fraction(0)) for d in dicts] for k in keys]
    return rows, [rdict.get(k, Fraction(0)) for k in keys]


def _poly_fields(D):
    return [g.primitive() for g in D.basis()]


def _free_coordinates(D):
    return [n for n in D.chart.names if not D.contains(VectorField.basis(D.chart, n))]


def _reduced_solutions(vecs, nvars):
    """Row-reduce a solution basis, leading entries at the highest monomials."""
    if not vecs:
        return []
    rev = [list(reversed(v)) for v in vecs]
    m, piv = rref_q(rev, nvars)
    return [list(reversed(m[i])) for i in range(len(piv))]


def _numerators(fields, Q, monos):
    """Polynomials ``P`` (in ``monos``) with ``v(P/Q) = 0`` for all fields."""
    Qe = Expr.from_poly(Q)
    rows = []
    for v in fields:
        vQ = v.apply(Qe)
        cols = [Qe * v.apply(Expr.from_poly(m)) - Expr.from_poly(m) * vQ for m in monos]
        r, _ = _coefficient_rows(cols)
        rows.extend(r)
    sols = nullspace_q(rows, len(monos)) if rows else [
        [Fraction(int(i == j)) for j in range(len(monos))] for i in range(len(monos))]
    out = []
    for vec in _reduced_solutions(sols, len(monos)):
        ints = integer_vector(vec)
        P = Poly()
        for c, m in zip(ints, monos):
            if c:
                P = P + m.scale(c)
        out.append(P)
    return out


def _positive(e):
    """Sign convention for functions defined up to sign: positive leading coefficient."""
    return -e if not e.is_zero() and e.num.lc() < 0 else e


def _candidate_key(e):
    return (e.complexity(), len(str(e)), str(e))


def _independent(exprs, names):
    J = [[e.diff(n) for n in names] for e in exprs]
    return rank(J) == len(exprs) if exprs else True


def extract_first_integrals(D, count, max_degree=DEFAULT_EXTRACT_DEGREE):
    """``count`` independent functions ``p`` with ``v(p) = 0`` for ``v`` in ``D``.

    Searched as ``P/Q`` with monomial ``Q`` and ``deg P, deg Q <= max_degree``.
    Raises :class:`IntegrationFailed` when the ansatz is exhausted.
    """
    if count <= 0:
        return []
    fields = _poly_fields(D)
    names = _free_coordinates(D)
    monos = _monomials(names, max_degree)
    pool = []
    seen = set()
    for qdeg in range(max_degree + 1):
        for Q in _monomials(names, qdeg, exact=True):
            for P in _numerators(fields, Q, monos):
                e = _positive(Expr.make(P, Q))
                if e.is_constant() or e in seen:
                    continue
                seen.add(e)
                pool.append(e)
        chosen = []
        for e in sorted(pool, key=_candidate_key):
            if _independent(chosen + [e], D.chart.names):
                chosen.append(e)
                if len(chosen) == count:
                    return chosen
    raise IntegrationFailed(
        f"found fewer than {count} first integrals up to degree {max_degree}",
        code="INTEGRATION_FAILED",
    )


def _symmetry_scalings(w, R, names, max_degree, limit=6):
    """Factors ``lam`` with ``lam*w`` a symmetry of ``R`` (ascending complexity)."""
    omegas = annihilator(R)
    rgens = _poly_fields(R)
    monos = _monomials(names, max_degree)
    found = []
    seen = set()
    for qdeg in range(max_degree + 1):
        for Q in _monomials(names, qdeg, exact=True):
            Qe = Expr.from_poly(Q)
            rows = []
            for r in rgens:
                br = lie_bracket(w, r)
                rQ = r.apply(Qe)
                for om in omegas:
                    a = contract(br, om)
                    b = contract(w, om)
                    if a.is_zero() and b.is_zero():
                        continue
                    cols = []
                    for m in monos:
                        me = Expr.from_poly(m)
                        cols.append(me * Qe * a - (Qe * r.apply(me) - me * rQ) * b)
                    den = Expr.from_poly(_common_den(cols))
                    r_rows, _ = _coefficient_rows([c * den for c in cols])
                    rows.extend(r_rows)
            sols = nullspace_q(rows, len(monos)) if rows else []
            for vec in _reduced_solutions(sols, len(monos)):
                ints = integer_vector(vec)
                P = Poly()
                for c, m in zip(ints, monos):
                    if c:
                        P = P + m.scale(c)
                lam = Expr.make(P, Q)
                if lam.is_zero() or lam in seen:
                    continue
                seen.add(lam)
                found.append(lam)
        if len(found) >= limit:
            break
    return sorted(found, key=_candidate_key)[:limit]


def _common_den(exprs):
    from .poly import cofactors

    den = Poly.const(1)
    for e in exprs:
        if not e.den.is_const():
            _, _, b = cofactors(den, e.den)
            den = den * b
    return den


class _OutputSolver:
    """Solves ``r(p) = 0`` on ``R`` and ``scaled[i](p) = delta_ij``.

    For each denominator ``Q`` the numerators annihilated by ``R`` are
    computed once; the normalization conditions are then posed on that
    (small) basis.
    """

    def __init__(self, R, names, max_degree):
        self.rgens = _poly_fields(R)
        self.names = names
        self.max_degree = max_degree
        self.monos = _monomials(names, max_degree)
        self._basis = {}

    def basis(self, Q):
        if Q not in self._basis:
            self._basis[Q] = [Expr.from_poly(P) for P in _numerators(self.rgens, Q, self.monos)]
        return self._basis[Q]

    def solve(self, j, scaled):
        polys = []
        for u in scaled:
            den = Expr.from_poly(_common_den(list(u.coeffs)))
            polys.append((u.scale(den), den))
        for qdeg in range(self.max_degree + 1):
            for Q in _monomials(self.names, qdeg, exact=True):
                B = self.basis(Q)
                if not B:
                    continue
                Qe = Expr.from_poly(Q)
                rows, rhs = [], []
                for i, (u, d) in enumerate(polys):
                    uQ = u.apply(Qe)
                    cols = [Qe * u.apply(P) - P * uQ for P in B]
                    target = d * Qe * Qe if i == j else ZERO
                    a, b = _coefficient_rows(cols, target)
                    rows += a
                    rhs += b
                x = solve_q(rows, rhs, len(B))
                if x is None:
                    continue
                num = sum((P * Expr.const(c) for c, P in zip(x, B) if c), ZERO)
                p = num / Qe
                if not p.is_constant():
                    return p
        return None


def normalize_flat_outputs(integrals, Y, R, max_degree=DEFAULT_EXTRACT_DEGREE, max_combos=64):
    """Pick flat outputs among functions of ``integrals`` that are normalized
    against symmetry-scaled generators of ``Y``.

    Returns ``(outputs, note)``; ``note`` is ``None`` on success and
    ``"NORMALIZATION_SKIPPED"`` when the raw integrals are returned.
    """
    ws = Y.echelon_basis()
    if len(ws) != len(integrals) or not ws:
        return list(integrals), "NORMALIZATION_SKIPPED"
    names = _free_coordinates(R)
    options = []
    for w in ws:
        w = w.primitive()
        lams = _symmetry_scalings(w, R, names, max_degree)
        if not lams:
            return list(integrals), "NORMALIZATION_SKIPPED"
        options.append([w.scale(l) for l in lams])
    solver = _OutputSolver(R, names, max_degree)
    for n_combo, scaled in enumerate(product(*options)):
        if n_combo >= max_combos:
            break
        outs = []
        for j in range(len(scaled)):
            p = solver.solve(j, list(scaled))
            if p is None:
                break
            outs.append(p)
        else:
            return outs, None
    return list(integrals), "NORMALIZATION_SKIPPED"


def flat_outputs(report, max_degree=DEFAULT_EXTRACT_DEGREE):
    """Fill ``report.flat_outputs`` from ``R_final`` and ``Y_final``."""
    if report.verdict != FLAT:
        report.extraction_status = "SKIPPED"
        return None
    R = report.R_final
    count = R.chart.dim - R.rank
    try:
        integrals = extract_first_integrals(R, count, max_degree)
    except IntegrationFailed as exc:
        report.extraction_status = "FAILED"
        report.notes.append(str(exc))
        return None
    outs, note = normalize_flat_outputs(integrals, report.Y_final, R, max_degree)
    if note:
        report.notes.append(note)
    outs = list(outs) + [Expr.symbol(u) for u in report.redundant_inputs]
    report.flat_outputs = outs
    report.extraction_status = "FOUND"
    return outs


# --------------------------------------------------------------------------
# function-level decomposition

@dataclass
class SeriesDecomposition:
    mode: str
    g: list
    h: list
    transformed: SampledSystem
    brunovsky_states: list
    new_inputs: dict
    complement: SampledSystem = None
    v_inputs: dict = field(default_factory=dict)
    extension: list = field(default_factory=list)
    tilde: list = field(default_factory=list)

    def recompose(self, sys):
        """``h(g(x, u))``; equals ``f`` for a valid decomposition."""
        sub = dict(zip(self.tilde, self.g))
        return [hi.subs(sub) for hi in self.h]


def _choose_rows(sys, g_a, B, caps):
    fields = B.basis()
    F = pushforward_matrix(sys, fields)
    size = len(fields)
    cols = list(range(size))
    for sub in _sorted_subsets(range(sys.n), size, F, cols, None):
        g = list(g_a) + [sys.f[i] for i in sub]
        J = [[gi.diff(v) for v in sys.chart.names] for gi in g]
        if rank(J) < sys.n:
            continue
        try:
            H = build_h(sys, g, **caps)
        except ModelError:
            continue
        return list(sub), g, H
    return None


def decompose_series(sys, mode="auto", hints=None, max_degree=DEFAULT_EXTRACT_DEGREE,
                     max_elim_degree=DEFAULT_ELIM_DEGREE, ansatz_degree=DEFAULT_ANSATZ_DEGREE):
    """Series connection of a Brunovsky block and a complement.

    ``mode`` is ``"full"``, ``"partial"`` or ``"auto"`` (full when the full
    condition holds).  ``hints`` optionally supplies the functions ``g_a``.
    """
    caps = {"max_degree": max_elim_degree, "ansatz_degree": ansatz_degree}
    K = kernel_distribution(sys)
    U = input_distribution(sys)
    full_ok = check_condition_full(sys)
    if mode == "auto":
        mode = "full" if full_ok else "partial"
    if mode == "full":
        if not full_ok:
            raise ModelError("full series condition fails", code="CONDITION_FAILED")
        B = U
    else:
        B = find_Uhat(U, Distribution(sys.chart), K)
        if B.rank == 0:
            raise ModelError("no input directions decouple", code="CONDITION_FAILED")
    m_u = B.rank
    count = sys.n - m_u
    D = sum_of(B, K)
    if hints:
        g_a = [as_expr(x) for x in hints][:count]
        for gi in g_a:
            for v in D.basis():
                if not v.apply(gi).is_zero():
                    raise ModelError(f"hint {gi} is not a first integral", code="HINT_INVALID")
        if len(g_a) < count:
            raise IntegrationFailed("not enough hint functions", code="INTEGRATION_FAILED")
    else:
        g_a = extract_first_integrals(D, count, max_degree)
    chosen = _choose_rows(sys, g_a, B, caps)
    if chosen is None:
        raise ModelError("no row selection factors f", code="NOT_FACTORABLE")
    rows, g, H = chosen
    T = H.transformed
    tnames = list(H.znames)
    b_states = tnames[count:]
    new_inputs = {}
    u_names = tilde_names([f"u{i + 1}" for i in range(len(b_states))], set(T.chart.names))
    for nm, st in zip(u_names, b_states):
        new_inputs[nm] = T.f[tnames.index(st)]
    dec = SeriesDecomposition(mode, g, H.h, T, b_states, new_inputs, tilde=tnames)
    if count == 0:
        return dec
    a_states = tnames[:count]
    fa = list(T.f[:count])
    depends_u = [i for i, e in enumerate(fa) if any(e.depends_on(u) for u in sys.inputs)]
    v_inputs = {}
    if depends_u:
        m_v = rank([[fa[i].diff(u) for u in sys.inputs] for i in depends_u])
        vrows = None
        ordered = sorted(depends_u, key=lambda i: (fa[i].complexity(), -i))
        for sub in combinations(ordered, m_v):
            if rank([[fa[i].diff(u) for u in sys.inputs] for i in sub]) == m_v:
                vrows = sorted(sub)
                break
        taken = set(T.chart.names) | set(u_names)
        vnames = []
        i = 1
        while len(vnames) < m_v:
            if f"v{i}" not in taken:
                vnames.append(f"v{i}")
            i += 1
        for nm, r in zip(vnames, vrows):
            v_inputs[nm] = fa[r]
        gv = [Expr.symbol(x) for x in tnames] + [fa[r] for r in vrows]
        gnames = tnames + vnames
        new_fa = []
        for i, e in enumerate(fa):
            if i in vrows:
                new_fa.append(Expr.symbol(vnames[vrows.index(i)]))
                continue
            G = factor_through(e, gv, gnames, max_degree=max_elim_degree, ansatz_degree=ansatz_degree)
            if G is None:
                raise ModelError("complement does not factor through the new inputs",
                                 code="NOT_FACTORABLE")
            new_fa.append(G)
        fa = new_fa
        dec.extension = [f"{nm}_next = u_c{j + 1}" for j, nm in enumerate(vnames)]
    inputs = list(b_states) + list(v_inputs)
    dec.complement = SampledSystem(a_states, inputs, fa)
    dec.v_inputs = v_inputs
    return dec


@dataclass
class Construction:
    levels: list
    flat_outputs: list
    status: str
    notes: list = field(default_factory=list)


def _invert(h, tnames, names, caps):
    """Tilde coordinates as functions of the original ones, when rational."""
    out = {}
    for t in tnames:
        try:
            G = factor_through(Expr.symbol(t), h, names, **caps)
        except EliminationError:
            G = None
        out[t] = G
    return out


def construct(sys, hints=None, max_degree=DEFAULT_EXTRACT_DEGREE,
              max_elim_degree=DEFAULT_ELIM_DEGREE, ansatz_degree=DEFAULT_ANSATZ_DEGREE,
              max_levels=None):
    """Iterated decomposition until the complement is empty.

    Flat outputs are the redundant inputs met along the way plus the final
    Brunovsky states, mapped back to the original coordinates where the
    coordinate changes invert rationally.
    """
    caps = {"max_degree": max_elim_degree, "ansatz_degree": ansatz_degree}
    levels = []
    notes = []
    back = {n: Expr.symbol(n) for n in sys.chart.names}
    outputs = []
    current = sys
    max_levels = max_levels or (sys.n + 1)
    status = "FOUND"

    def mapped(e):
        free = e.free_symbols
        if any(back.get(v) is None for v in free):
            notes.append(f"{e} kept in intermediate coordinates")
            return e, False
        return e.subs({v: back[v] for v in free}), True

    for level in range(max_levels):
        split = split_redundant(current)
        for u in split.redundant:
            outputs.append(_positive(mapped(Expr.symbol(u))[0]))
        work = split.reduced
        if not work.inputs:
            status = "FAILED"
            notes.append("complement has no effective input")
            break
        try:
            dec = decompose_series(work, "auto", hints if level == 0 else None,
                                   max_degree, max_elim_degree, ansatz_degree)
        except (ModelError, IntegrationFailed, EliminationError) as exc:
            status = "FAILED"
            notes.append(f"level {level + 1}: {exc}")
            break
        levels.append(dec)
        inv = _invert(dec.h, dec.tilde, list(work.states), caps)
        new_back = {}
        for t, G in inv.items():
            new_back[t] = None if G is None else G.subs(
                {v: back[v] for v in G.free_symbols}) if all(
                back.get(v) is not None for v in G.free_symbols) else None
        for nm, e in dec.v_inputs.items():
            new_back[nm] = None
        back.update(new_back)
        if dec.complement is None:
            for s in dec.brunovsky_states:
                outputs.append(_positive(mapped(Expr.symbol(s))[0]))
            break
        current = dec.complement
    else:
        status = "FAILED"
        notes.append("level limit reached")
    return Construction(levels, outputs, status, notes)


__all__ = [
    "FLAT",
    "NOT_FLAT",
    "INCONCLUSIVE",
    "IterationTrace",
    "FlatnessReport",
    "SeriesDecomposition",
    "Construction",
    "check_condition_full",
    "find_Uhat",
    "detect_redundant_stage",
    "test_flat",
    "extract_first_integrals",
    "normalize_flat_outputs",
    "flat_outputs",
    "decompose_series",
    "construct",
]
