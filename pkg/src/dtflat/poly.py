"""Sparse multivariate polynomials over the integers.

A :class:`Poly` stores its generators in natural-sort order together with a
dict ``exponent tuple -> int``.  Generators that do not occur are dropped, so
two equal polynomials always have identical ``gens`` and ``terms``.
"""

import re
from functools import lru_cache
from math import gcd

from sympy.polys.domains import ZZ
from sympy.polys.orderings import grevlex
from sympy.polys.rings import PolyRing

from . import kernels

_DIGITS = re.compile(r"(\d+)")


def name_key(name):
    """Natural sort key: ``x2 < x10``."""
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in _DIGITS.split(name) if p)


def sort_names(names):
    return tuple(sorted(set(names), key=name_key))


def grevlex_key(e):
    return (sum(e), tuple(-k for k in reversed(e)))


def _merge_gens(ga, gb):
    if ga == gb:
        return ga
    return sort_names(ga + gb)


def _embed(terms, src, dst):
    if src == dst:
        return terms
    index = {g: i for i, g in enumerate(dst)}
    return kernels.embed_terms(terms, [index[g] for g in src], len(dst))


def _trim(gens, terms):
    """Drop generators with zero exponent in every term."""
    if not terms:
        return (), {}
    n = len(gens)
    used = [False] * n
    for e in terms:
        for i in range(n):
            if e[i]:
                used[i] = True
    if all(used):
        return gens, terms
    keep = [i for i in range(n) if used[i]]
    new_gens = tuple(gens[i] for i in keep)
    return new_gens, {tuple(e[i] for i in keep): c for e, c in terms.items()}


class Poly:
    __slots__ = ("gens", "terms", "_hash")

    def __init__(self, gens=(), terms=None, _trusted=False):
        terms = {} if terms is None else terms
        if not _trusted:
            gens, terms = _trim(tuple(gens), {e: c for e, c in terms.items() if c})
        self.gens = gens
        self.terms = terms
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c):
        c = int(c)
        return cls((), {(): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, name):
        return cls((name,), {(1,): 1}, _trusted=True)

    @classmethod
    def _new(cls, gens, terms):
        return cls(*_trim(gens, terms), _trusted=True)

    # predicates ---------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.gens

    def const_value(self):
        return self.terms.get((), 0) if not self.gens else None

    def is_monomial(self):
        return len(self.terms) == 1

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.gens == other.gens and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gens, frozenset(self.terms.items())))
        return self._hash

    def __len__(self):
        return len(self.terms)

    # arithmetic ---------------------------------------------------------
    def _pair(self, other):
        gens = _merge_gens(self.gens, other.gens)
        return gens, _embed(self.terms, self.gens, gens), _embed(other.terms, other.gens, gens)

    def __add__(self, other):
        gens, a, b = self._pair(other)
        return Poly._new(gens, kernels.add_terms(a, b))

    def __sub__(self, other):
        gens, a, b = self._pair(other)
        return Poly._new(gens, kernels.add_terms(a, b, -1))

    def __neg__(self):
        return Poly(self.gens, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not self.terms or not other.terms:
            return Poly()
        gens, a, b = self._pair(other)
        return Poly._new(gens, kernels.mul_terms(a, b))

    def scale(self, k):
        k = int(k)
        if not k:
            return Poly()
        if k == 1:
            return self
        return Poly(self.gens, {e: c * k for e, c in self.terms.items()}, _trusted=True)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div_int(self, k):
        return Poly(self.gens, {e: c // k for e, c in self.terms.items()}, _trusted=True)

    # structure ----------------------------------------------------------
    def degree(self, var=None):
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        if var not in self.gens:
            return 0
        i = self.gens.index(var)
        return max(e[i] for e in self.terms)

    def leading(self):
        """Leading (exponent, coefficient) under grevlex."""
        e = max(self.terms, key=grevlex_key)
        return e, self.terms[e]

    def lc(self):
        return self.leading()[1] if self.terms else 0

    def content(self):
        g = 0
        for c in self.terms.values():
            g = gcd(g, c)
            if g == 1:
                break
        return g

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def diff(self, var):
        if var not in self.gens:
            return Poly()
        return Poly._new(self.gens, kernels.diff_terms(self.terms, self.gens.index(var)))

    def evaluate(self, values):
        """Evaluate with ``values`` a mapping name -> number."""
        return kernels.eval_terms(self.terms, [values[g] for g in self.gens])

    def rename(self, mapping):
        """Injective generator renaming."""
        new = [mapping.get(g, g) for g in self.gens]
        order = sort_names(new)
        if len(order) != len(new):
            raise ValueError("renaming is not injective")
        return Poly(order, _embed(self.terms, tuple(new), order), _trusted=True)

    def __repr__(self):
        return f"Poly({self.gens!r}, {self.terms!r})"


@lru_cache(maxsize=256)
def _ring(gens):
    return PolyRing(gens, ZZ, grevlex)


def _monomial_gcd(a, b):
    """gcd when ``a`` is a single term."""
    gens, ta, tb = a._pair(b)
    (ea, ca), = ta.items()
    n = len(gens)
    m = list(ea)
    g = abs(ca)
    for e, c in tb.items():
        for i in range(n):
            if e[i] < m[i]:
                m[i] = e[i]
        g = gcd(g, c)
    return Poly._new(gens, {tuple(m): g})


def cofactors(a, b):
    """Return ``(g, a/g, b/g)`` with ``g`` the gcd over Z (positive lc)."""
    if a.is_zero():
        if b.is_zero():
            return Poly(), Poly(), Poly()
        s = -1 if b.lc() < 0 else 1
        return b.scale(s), Poly.const(0), Poly.const(s)
    if b.is_zero():
        s = -1 if a.lc() < 0 else 1
        return a.scale(s), Poly.const(s), Poly.const(0)
    if a.is_const() or b.is_const():
        g = gcd(a.content(), b.content())
        return Poly.const(g), a.exact_div_int(g), b.exact_div_int(g)
    if a.is_monomial() or b.is_monomial():
        g = _monomial_gcd(a, b) if a.is_monomial() else _monomial_gcd(b, a)
        return g, divide_exact(a, g), divide_exact(b, g)
    gens, ta, tb = a._pair(b)
    R = _ring(gens)
    h, ca, cb = R.from_dict(ta).cofactors(R.from_dict(tb))
    h, ca, cb = (Poly._new(gens, {e: int(c) for e, c in x.items()}) for x in (h, ca, cb))
    if h.lc() < 0:
        h, ca, cb = -h, -ca, -cb
    return h, ca, cb


def divide_exact(a, b):
    """Exact quotient ``a/b``; raises ``ArithmeticError`` on a remainder."""
    if b.is_const():
        k = b.const_value()
        out = {}
        for e, c in a.terms.items():
            q, r = divmod(c, k)
            if r:
                raise ArithmeticError("inexact division")
            out[e] = q
        return Poly(a.gens, out, _trusted=True)
    if b.is_monomial():
        gens, ta, tb = a._pair(b)
        (eb, cb), = tb.items()
        out = {}
        for e, c in ta.items():
            q, r = divmod(c, cb)
            d = tuple(x - y for x, y in zip(e, eb))
            if r or min(d) < 0:
                raise ArithmeticError("inexact division")
            out[d] = q
        return Poly._new(gens, out)
    gens, ta, tb = a._pair(b)
    R = _ring(gens)
    try:
        q = R.from_dict(ta).exquo(R.from_dict(tb))
    except Exception as exc:  # sympy raises ExactQuotientFailed
        raise ArithmeticError("inexact division") from exc
    return Poly._new(gens, {e: int(c) for e, c in q.items()})


def poly_gcd(a, b):
    return cofactors(a, b)[0]
