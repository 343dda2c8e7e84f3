"""Elimination: Groebner bases, factorization through a map, and the map h.

``factor_through(c, g)`` looks for a rational ``G`` with ``G(g(x, u)) = c``.
A Jacobian rank test settles the negative case cheaply.  Positive cases are
tried first with a rational ansatz solved at exact sample points (fast for
the small degrees that occur in practice) and then by Groebner elimination
of the graph ideal, which is complete up to its degree cap.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import gcd

from . import kernels
from .errors import EliminationError, EvaluationError, ExprError, ModelError
from .expr import Expr, as_expr
from .field_linalg import rank
from .poly import Poly, name_key
from .qlinalg import PRIME, nullspace_q, rational_reconstruct, to_mod

DEFAULT_ELIM_DEGREE = 8
DEFAULT_ANSATZ_DEGREE = 4
DEFAULT_MAX_PAIRS = 4000
EXACT_ANSATZ_LIMIT = 60


class DegreeCapExceeded(EliminationError):
    code = "DEGREE_CAP_EXCEEDED"


# --------------------------------------------------------------------------
# term-dict helpers for a fixed variable ordering

def _order_key(blocks):
    """Block degrevlex key; larger key = larger monomial."""
    bounds = []
    start = 0
    for size in blocks:
        bounds.append((start, start + size))
        start += size

    def key(e):
        out = []
        for a, b in bounds:
            part = e[a:b]
            out.append(sum(part))
            out.extend(-k for k in reversed(part))
        return tuple(out)

    return key


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _mono_mul(terms, mono, scale=1):
    return {tuple(x + y for x, y in zip(e, mono)): c * scale for e, c in terms.items()}


def _primitive(terms, key):
    if not terms:
        return terms
    g = 0
    for c in terms.values():
        g = gcd(g, c)
        if g == 1:
            break
    lm = max(terms, key=key)
    if terms[lm] < 0:
        g = -g
    if g == 1:
        return terms
    return {e: c // g for e, c in terms.items()}


class _GPoly:
    __slots__ = ("terms", "lm", "lc", "sugar")

    def __init__(self, terms, key, sugar=None):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]
        self.sugar = max(sum(e) for e in terms) if sugar is None else sugar


def _reduce(terms, basis, key, full=True):
    """Fraction-free normal form of ``terms`` modulo ``basis``."""
    p = dict(terms)
    rem = {}
    while p:
        lm = max(p, key=key)
        c = p[lm]
        for g in basis:
            if _divides(g.lm, lm):
                q = tuple(x - y for x, y in zip(lm, g.lm))
                d = gcd(c, g.lc)
                a, b = g.lc // d, c // d
                if a != 1:
                    p = {e: v * a for e, v in p.items()}
                    rem = {e: v * a for e, v in rem.items()}
                p = kernels.add_terms(p, _mono_mul(g.terms, q), -b)
                break
        else:
            if not full:
                rem.update(p)
                break
            rem[lm] = p.pop(lm)
    return _primitive(rem, key)


class PolyIdeal:
    """Ideal in Q[variables] with a block degrevlex order.

    ``blocks`` lists variable names block by block; the first block is the
    most expensive one (eliminated first).
    """

    def __init__(self, generators, blocks):
        self.blocks = [list(b) for b in blocks]
        self.variables = [v for b in self.blocks for v in b]
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variables repeat across blocks")
        self.key = _order_key([len(b) for b in self.blocks])
        index = {v: i for i, v in enumerate(self.variables)}
        self.generators = []
        for g in generators:
            p = g.num if isinstance(g, Expr) else g
            if p.is_zero():
                continue
            missing = [v for v in p.gens if v not in index]
            if missing:
                raise ValueError(f"generator uses variables outside the order: {missing}")
            t = kernels.embed_terms(p.terms, [index[v] for v in p.gens], len(self.variables))
            self.generators.append(_primitive(t, self.key))

    def to_poly(self, terms):
        return Poly(self.variables, terms)

    def groebner(self, max_degree=DEFAULT_ELIM_DEGREE, max_pairs=DEFAULT_MAX_PAIRS):
        """Reduced Groebner basis as a list of :class:`Poly` (ascending order)."""
        return [self.to_poly(t) for t in self._groebner_terms(max_degree, max_pairs)]

    def _groebner_terms(self, max_degree, max_pairs):
        key = self.key
        basis = []
        pairs = []

        def add(h):
            g = _GPoly(h, key)
            if all(k == 0 for k in g.lm):
                basis[:] = [g]
                pairs.clear()
                return True
            idx = len(basis)
            for i, b in enumerate(basis):
                pairs.append((i, idx))
            basis.append(g)
            return False

        for t in sorted(self.generators, key=lambda t: key(max(t, key=key))):
            h = _reduce(t, basis, key)
            if h and add(h):
                return [basis[0].terms]
        processed = set()
        steps = 0
        while pairs:
            # normal strategy, sugar tiebreak
            best = min(
                range(len(pairs)),
                key=lambda k: (
                    key(_lcm(basis[pairs[k][0]].lm, basis[pairs[k][1]].lm)),
                    self._pair_sugar(basis, pairs[k]),
                ),
            )
            i, j = pairs.pop(best)
            processed.add((i, j))
            gi, gj = basis[i], basis[j]
            L = _lcm(gi.lm, gj.lm)
            if all(min(a, b) == 0 for a, b in zip(gi.lm, gj.lm)):
                continue
            if self._chain_skip(basis, i, j, L, pairs):
                continue
            if sum(L) > max_degree:
                raise DegreeCapExceeded(
                    f"S-polynomial degree {sum(L)} above cap {max_degree}",
                    info={"degree": sum(L), "cap": max_degree},
                )
            steps += 1
            if steps > max_pairs:
                raise DegreeCapExceeded(f"more than {max_pairs} S-polynomials", info={"cap": max_pairs})
            qi = tuple(a - b for a, b in zip(L, gi.lm))
            qj = tuple(a - b for a, b in zip(L, gj.lm))
            d = gcd(gi.lc, gj.lc)
            s = kernels.add_terms(_mono_mul(gi.terms, qi, gj.lc // d), _mono_mul(gj.terms, qj), -(gi.lc // d))
            h = _reduce(s, basis, key)
            if h:
                if max(sum(e) for e in h) > max_degree:
                    raise DegreeCapExceeded(
                        "basis element above the degree cap", info={"cap": max_degree}
                    )
                if add(h):
                    return [basis[0].terms]
        return self._interreduce(basis)

    @staticmethod
    def _pair_sugar(basis, pair):
        gi, gj = basis[pair[0]], basis[pair[1]]
        L = _lcm(gi.lm, gj.lm)
        return max(gi.sugar + sum(L) - sum(gi.lm), gj.sugar + sum(L) - sum(gj.lm))

    @staticmethod
    def _chain_skip(basis, i, j, L, pending):
        pend = set(pending)
        for k, g in enumerate(basis):
            if k in (i, j) or not _divides(g.lm, L):
                continue
            if (min(i, k), max(i, k)) not in pend and (min(j, k), max(j, k)) not in pend:
                return True
        return False

    def _interreduce(self, basis):
        key = self.key
        lms = [g.lm for g in basis]
        keep = []
        for a, g in enumerate(basis):
            dominated = False
            for b, m in enumerate(lms):
                if b == a or not _divides(m, g.lm):
                    continue
                if m != g.lm or b < a:
                    dominated = True
                    break
            if not dominated:
                keep.append(g)
        out = []
        for a, g in enumerate(keep):
            others = [h for b, h in enumerate(keep) if b != a]
            t = _reduce(g.terms, others, key)
            out.append(_GPoly(t, key))
        out.sort(key=lambda g: key(g.lm))
        return [g.terms for g in out]


def groebner(generators, blocks, max_degree=DEFAULT_ELIM_DEGREE):
    return PolyIdeal(generators, blocks).groebner(max_degree)


# --------------------------------------------------------------------------
# factor_through

def _fresh_names(k, taken):
    names = []
    i = 1
    while len(names) < k:
        n = f"z{i}"
        if n not in taken:
            names.append(n)
        i += 1
    return names


def _temp_names(k, taken):
    out = []
    i = 0
    while len(out) < k:
        n = f"_z{i}_"
        if n not in taken:
            out.append(n)
        i += 1
    return out


def _monomials(k, degree):
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(k), d):
            e = [0] * k
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _mono_value(e, vals):
    v = Fraction(1)
    for x, k in zip(vals, e):
        if k:
            v *= x ** k
    return v


def _verify(G, c, g, tnames):
    try:
        back = G.subs(dict(zip(tnames, g)))
    except ExprError:
        return False
    return back == c


def functionally_dependent(c, g, variables=None):
    """Generic rank test: is ``dc`` in the span of ``dg``?"""
    if variables is None:
        vs = set(c.free_symbols)
        for gi in g:
            vs.update(gi.free_symbols)
        variables = sorted(vs, key=name_key)
    Jg = [[gi.diff(v) for v in variables] for gi in g]
    rg = rank(Jg) if Jg else 0
    return rank(Jg + [[c.diff(v) for v in variables]]) == rg


def _ansatz(c, g, tnames, degree, rng, variables):
    """Try ``G = P/Q`` with numerator/denominator degree ``<= degree``."""
    k = len(g)
    monos = _monomials(k, degree)
    nm = len(monos)
    ncols = 2 * nm
    npts = ncols + 4
    rows = []
    pts_tried = 0
    while len(rows) < npts:
        pts_tried += 1
        if pts_tried > 20 * npts:
            return None
        pt = {v: Fraction(rng.randint(-30, 30), rng.randint(1, 12)) for v in variables}
        try:
            cv = c.eval_at(pt)
            gv = [gi.eval_at(pt) for gi in g]
        except EvaluationError:
            continue
        mv = [_mono_value(e, gv) for e in monos]
        rows.append(mv + [-cv * x for x in mv])
    modrows = [[to_mod(x) for x in r] for r in rows]
    basis = kernels.nullspace_mod(modrows, ncols, PRIME)
    if not basis:
        return None
    for vec in basis:
        if not any(vec[nm:]):
            continue
        fr = [rational_reconstruct(x) for x in vec]
        if None in fr:
            continue
        G = _ansatz_candidate(fr, monos, nm, tnames)
        if G is not None and _verify(G, c, g, tnames):
            return G
    if ncols > EXACT_ANSATZ_LIMIT:
        return None
    for vec in nullspace_q(rows, ncols):
        if not any(vec[nm:]):
            continue
        G = _ansatz_candidate(vec, monos, nm, tnames)
        if G is not None and _verify(G, c, g, tnames):
            return G
    return None


def _ansatz_candidate(vec, monos, nm, tnames):
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    Pp = Poly(tnames, {e: int(x * den) for e, x in zip(monos, vec[:nm]) if x})
    Qp = Poly(tnames, {e: int(x * den) for e, x in zip(monos, vec[nm:]) if x})
    if Qp.is_zero():
        return None
    return Expr.make(Pp, Qp)


def _eliminate(c, g, tnames, variables, max_degree):
    """Graph-ideal elimination; returns G, or None when no w-linear relation exists."""
    taken = set(variables) | set(tnames)
    w = next(n for n in ("_w_", "_w0_", "_w1_") if n not in taken)
    t = next(n for n in ("_t_", "_t0_", "_t1_") if n not in taken)
    gens = []
    den_prod = Poly.const(1)
    for z, gi in zip(tnames, g):
        gens.append(gi.den * Poly.var(z) - gi.num)
        den_prod = den_prod * gi.den
    gens.append(c.den * Poly.var(w) - c.num)
    den_prod = den_prod * c.den
    first = list(variables)
    if not den_prod.is_const():
        gens.append(Poly.const(1) - Poly.var(t) * den_prod)
        first.append(t)
    ideal = PolyIdeal(gens, [first, [w], list(tnames)])
    nfirst = len(first)
    best = None
    for terms in ideal._groebner_terms(max_degree, DEFAULT_MAX_PAIRS):
        if any(any(e[:nfirst]) for e in terms):
            continue
        wdeg = max(e[nfirst] for e in terms)
        if wdeg != 1:
            continue
        best = terms
        break
    if best is None:
        return None
    a = {e[nfirst + 1:]: v for e, v in best.items() if e[nfirst] == 1}
    b = {e[nfirst + 1:]: v for e, v in best.items() if e[nfirst] == 0}
    G = Expr.make(-Poly(tnames, b), Poly(tnames, a))
    return G if _verify(G, c, g, tnames) else None


def factor_through(c, g, names=None, max_degree=DEFAULT_ELIM_DEGREE,
                   ansatz_degree=DEFAULT_ANSATZ_DEGREE, seed=0):
    """Find ``G`` in variables ``names`` with ``G(g) = c`` identically.

    Returns ``None`` when no rational ``G`` exists; raises
    :class:`DegreeCapExceeded` when the search is inconclusive.
    """
    c = as_expr(c)
    g = [as_expr(x) for x in g]
    variables = set(c.free_symbols)
    for gi in g:
        variables.update(gi.free_symbols)
    variables = sorted(variables, key=name_key)
    if names is None:
        names = _fresh_names(len(g), set(variables))
    names = list(names)
    if len(names) != len(g):
        raise ValueError("one name per component of g is required")
    if c.is_constant():
        return c
    if not functionally_dependent(c, g, variables):
        return None
    tnames = _temp_names(len(g), set(variables) | set(names))
    # a component of g may already equal c
    for z, gi in zip(tnames, g):
        if gi == c:
            return Expr.symbol(names[tnames.index(z)])
    rng = random.Random(seed)
    G = None
    for d in range(1, ansatz_degree + 1):
        G = _ansatz(c, g, tnames, d, rng, variables)
        if G is not None:
            break
    if G is None:
        used = [i for i, gi in enumerate(g) if not gi.is_constant()]
        G = _eliminate(c, [g[i] for i in used], [tnames[i] for i in used], variables, max_degree)
        if G is None:
            return None
    return G.subs({z: Expr.symbol(n) for z, n in zip(tnames, names)})


# --------------------------------------------------------------------------
# h with f = h o g

def tilde_names(names, taken=()):
    taken = set(taken)
    out = []
    for n in names:
        stem = n.rstrip("0123456789")
        digits = n[len(stem):]
        cand = f"{stem}t{digits}" if digits else f"{n}_t"
        while cand in taken or cand in out:
            cand += "_"
        out.append(cand)
    return out


@dataclass
class HMap:
    """``f = h(g(x, u))`` and the system ``xt_next = g(h(xt), u)``."""

    g: list
    h: list
    znames: list
    transformed: object = None
    notes: list = field(default_factory=list)

    def substitute_h(self, e):
        return as_expr(e).subs(dict(zip(self.znames, self.h)))


def build_h(sys, g, names=None, max_degree=DEFAULT_ELIM_DEGREE, ansatz_degree=DEFAULT_ANSATZ_DEGREE):
    """Factor every update function through ``g``.

    With ``len(g) == n`` the transformed system on the tilde chart is built as
    well.  Raises :class:`ModelError` (NOT_FACTORABLE) when some component
    does not factor.
    """
    from .system import SampledSystem

    g = [as_expr(x) for x in g]
    if names is None:
        names = tilde_names(sys.states, sys.chart.names) if len(g) == sys.n else _fresh_names(
            len(g), set(sys.chart.names))
    names = list(names)
    h = []
    for x, fi in zip(sys.states, sys.f):
        G = factor_through(fi, g, names, max_degree=max_degree, ansatz_degree=ansatz_degree)
        if G is None:
            raise ModelError(f"f for {x} does not factor through g", code="NOT_FACTORABLE")
        h.append(G)
    out = HMap(g, h, names)
    if len(g) == sys.n:
        back = dict(zip(sys.states, h))
        ft = [gi.subs(back) for gi in g]
        out.transformed = SampledSystem(names, sys.inputs, ft)
    return out


__all__ = [
    "PolyIdeal",
    "groebner",
    "factor_through",
    "functionally_dependent",
    "build_h",
    "HMap",
    "DegreeCapExceeded",
    "tilde_names",
]
