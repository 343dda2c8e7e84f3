"""Exact rational functions over Q.

An :class:`Expr` is ``num/den`` with integer-coefficient polynomials, kept in
canonical form: gcd(num, den) = 1 (including the integer content) and the
grevlex-leading coefficient of ``den`` positive.  Canonical forms are compared
structurally, so ``a == b`` is an exact identity test.
"""

import re
from fractions import Fraction
from numbers import Number

from .errors import EvaluationError, ExprError, ParseError
from .poly import Poly, cofactors, name_key, sort_names

SINGULAR_THRESHOLD = 1e-12

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Expr:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        # prefer the constructors below; this one trusts canonical input
        self.num = num
        self.den = Poly.const(1) if den is None else den
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def make(cls, num, den):
        """Canonicalize ``num/den``."""
        if den.is_zero():
            raise ExprError("zero denominator", code="DIVISION_BY_ZERO")
        if num.is_zero():
            return ZERO
        if den.is_const():
            d = den.const_value()
            if d == 1:
                return cls(num, den)
            g = num.content()
            from math import gcd

            g = gcd(g, d)
            if d < 0:
                g = -g
            return cls(num.exact_div_int(g), Poly.const(d // g))
        _, num, den = cofactors(num, den)
        if den.lc() < 0:
            num, den = -num, -den
        return cls(num, den)

    @classmethod
    def const(cls, value):
        if isinstance(value, Expr):
            return value
        q = Fraction(value)
        if q == 0:
            return ZERO
        return cls(Poly.const(q.numerator), Poly.const(q.denominator))

    @classmethod
    def symbol(cls, name):
        if not _IDENT.match(name):
            raise ExprError(f"invalid identifier {name!r}")
        return cls(Poly.var(name))

    @classmethod
    def from_poly(cls, p):
        return cls(p)

    # predicates ---------------------------------------------------------
    def is_zero(self):
        return self.num.is_zero()

    def is_constant(self):
        return self.num.is_const() and self.den.is_const()

    def is_polynomial(self):
        return self.den.is_const() and self.den.const_value() == 1

    def is_symbol(self):
        n = self.num
        return (
            self.is_polynomial()
            and len(n.gens) == 1
            and n.terms == {(1,): 1}
        )

    def to_fraction(self):
        if not self.is_constant():
            raise ExprError(f"{self} is not a constant")
        return Fraction(self.num.const_value() or 0, self.den.const_value())

    @property
    def free_symbols(self):
        return sort_names(self.num.gens + self.den.gens)

    def depends_on(self, var):
        return var in self.num.gens or var in self.den.gens

    def complexity(self):
        """Total degree of numerator plus denominator."""
        return max(self.num.degree(), 0) + max(self.den.degree(), 0)

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Number):
            other = Expr.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(x):
        if isinstance(x, Expr):
            return x
        if isinstance(x, (int, Fraction)):
            return Expr.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return Expr.make(self.num + other.num, self.den)
        return Expr.make(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return Expr(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ZERO
        if self.is_polynomial() and other.is_polynomial():
            return Expr(self.num * other.num)
        # cross-cancel before multiplying to keep intermediate sizes down
        _, a, d = cofactors(self.num, other.den)
        _, c, b = cofactors(other.num, self.den)
        num, den = a * c, b * d
        if den.lc() < 0:
            num, den = -num, -den
        return Expr(num, den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ExprError("division by zero", code="DIVISION_BY_ZERO")
        num, den = self.den, self.num
        if den.lc() < 0:
            num, den = -num, -den
        return Expr(num, den)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ExprError("exponent must be an integer", code="NONINTEGER_EXPONENT")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return ONE
        num, den = self.num ** k, self.den ** k
        return Expr(num, den)

    # calculus -----------------------------------------------------------
    def diff(self, var):
        if not self.depends_on(var):
            return ZERO
        if self.den.is_const():
            return Expr.make(self.num.diff(var), self.den)
        dn, dd = self.num.diff(var), self.den.diff(var)
        return Expr.make(dn * self.den - self.num * dd, self.den * self.den)

    def subs(self, bindings):
        """Simultaneous substitution ``{name: Expr}``."""
        free = set(self.free_symbols)
        bind = {}
        for k, v in bindings.items():
            if k in free:
                v = Expr.const(v) if not isinstance(v, Expr) else v
                if not (v.is_symbol() and v.num.gens[0] == k):
                    bind[k] = v
        if not bind:
            return self
        rename = _as_renaming(bind, free)
        if rename is not None:
            num, den = self.num.rename(rename), self.den.rename(rename)
            if den.lc() < 0:
                num, den = -num, -den
            return Expr(num, den)
        degs = {v: max(self.num.degree(v), self.den.degree(v)) for v in bind}
        num = _subs_poly(self.num, bind, degs)
        den = _subs_poly(self.den, bind, degs)
        if den.is_zero():
            raise ExprError(
                f"substitution makes the denominator of {self} vanish",
                code="RESULT_DENOMINATOR_ZERO",
            )
        return Expr.make(num, den)

    def eval_at(self, point, threshold=SINGULAR_THRESHOLD):
        """Evaluate at ``point`` (name -> number).

        Exact for int/Fraction values; floating (or complex) otherwise, where
        a denominator below ``threshold`` in magnitude is a singular point.
        """
        try:
            d = self.den.evaluate(point)
            n = self.num.evaluate(point)
        except KeyError as exc:
            raise EvaluationError(f"unbound variable {exc.args[0]}", code="UNBOUND_VARIABLE") from None
        if isinstance(d, (int, Fraction)):
            if d == 0:
                raise EvaluationError(f"pole of {self} at {point}")
            return Fraction(n) / d if not isinstance(n, (float, complex)) else n / d
        if abs(d) < threshold:
            raise EvaluationError(f"pole of {self} at {point}")
        return n / d

    # printing -----------------------------------------------------------
    def __str__(self):
        if self.is_polynomial():
            return format_poly(self.num)
        num = format_poly(self.num)
        if len(self.num) > 1:
            num = f"({num})"
        den = format_poly(self.den)
        if not _atomic_den(self.den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"Expr({str(self)!r})"


def _atomic_den(p):
    if p.is_const():
        return True
    if len(p) != 1:
        return False
    (e, c), = p.terms.items()
    return c == 1 and sum(1 for k in e if k) == 1


def _as_renaming(bind, free):
    """Return a name map if every binding is a plain symbol and the map is injective."""
    mapping = {}
    for k, v in bind.items():
        if not v.is_symbol():
            return None
        mapping[k] = v.num.gens[0]
    targets = list(mapping.values()) + [g for g in free if g not in mapping]
    if len(set(targets)) != len(targets):
        return None
    return mapping


def _subs_poly(p, bind, degs):
    """``p`` with bound generators replaced, scaled by prod(den_v^deg_v)."""
    if p.is_zero():
        return p
    gens = p.gens
    bidx = [i for i, g in enumerate(gens) if g in bind]
    fidx = [i for i, g in enumerate(gens) if g not in bind]
    fgens = tuple(gens[i] for i in fidx)
    groups = {}
    for e, c in p.terms.items():
        key = tuple(e[i] for i in bidx)
        sub = tuple(e[i] for i in fidx)
        groups.setdefault(key, {})[sub] = c
    bound_names = [gens[i] for i in bidx]
    missing = [v for v in bind if v not in gens]
    num_pows = {}
    den_pows = {}

    def pw(cache, v, base, k):
        r = cache.get((v, k))
        if r is None:
            r = base ** k
            cache[(v, k)] = r
        return r

    total = Poly()
    for key, coeff_terms in groups.items():
        term = Poly(fgens, coeff_terms)
        for v, k in zip(bound_names, key):
            b = bind[v]
            if k:
                term = term * pw(num_pows, v, b.num, k)
            if degs[v] - k:
                term = term * pw(den_pows, v, b.den, degs[v] - k)
        for v in missing:
            if degs[v]:
                term = term * pw(den_pows, v, bind[v].den, degs[v])
        total = total + term
    return total


def format_poly(p):
    if p.is_zero():
        return "0"
    gens = p.gens
    out = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        factors = []
        for g, k in zip(gens, e):
            if k == 1:
                factors.append(g)
            elif k:
                factors.append(f"{g}^{k}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


ZERO = Expr(Poly())
ONE = Expr(Poly.const(1))


def sym(name):
    return Expr.symbol(name)


def symbols(names):
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return [Expr.symbol(n) for n in names]


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    return Expr.const(x)


# parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?|\.\d+)|(?P<id>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    toks = []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1::]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", pos, code="DIVISION_BY_ZERO_LITERAL")
                e = e / rhs
        return e

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+" and self.peek()[0] == "op":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.base()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            k = self.exponent(pos)
            if k < 0 and base.is_zero():
                raise ParseError("division by zero", pos, code="DIVISION_BY_ZERO_LITERAL")
            base = base ** k
        return base

    def exponent(self, pos):
        sign = 1
        kind, v, p = self.peek()
        if v == "-":
            self.take()
            sign = -1
            kind, v, p = self.peek()
        if kind == "num":
            self.take()
            if not v.isdigit():
                raise ParseError("exponent must be an integer", p, code="NONINTEGER_EXPONENT")
            return sign * int(v)
        if v == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            if not inner.is_constant() or inner.to_fraction().denominator != 1:
                raise ParseError("exponent must be an integer", p, code="NONINTEGER_EXPONENT")
            return sign * int(inner.to_fraction())
        if kind == "id":
            raise ParseError("exponent must be an integer", p, code="NONINTEGER_EXPONENT")
        raise ParseError("missing exponent", p)

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Expr.const(Fraction(v))
        if kind == "id":
            return Expr.symbol(v)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {v or 'end of input'!r}", pos)


def parse(text):
    """Parse expression text into a canonical :class:`Expr`."""
    return _Parser(text).parse()


def diff(e, var):
    return e.diff(var)


def substitute(e, bindings):
    return e.subs(bindings)


def eval_at(e, point, threshold=SINGULAR_THRESHOLD):
    return e.eval_at(point, threshold)


__all__ = [
    "Expr",
    "ZERO",
    "ONE",
    "parse",
    "sym",
    "symbols",
    "as_expr",
    "diff",
    "substitute",
    "eval_at",
    "format_poly",
    "name_key",
]
