"""Dense linear algebra over Q (Fractions) and modulo a prime."""

from fractions import Fraction
from math import isqrt, lcm

from .kernels import nullspace_mod, rank_mod, rref_int

_ZERO = Fraction(0)

PRIME = 2147483647


def to_mod(x, p=PRIME):
    if isinstance(x, Fraction):
        return x.numerator * pow(x.denominator, -1, p) % p
    return int(x) % p


def rank_modp(rows, ncols, p=PRIME):
    return rank_mod([[to_mod(x, p) for x in r] for r in rows], ncols, p)


def nullspace_modp(rows, ncols, p=PRIME):
    return nullspace_mod([[to_mod(x, p) for x in r] for r in rows], ncols, p)


def rational_reconstruct(a, p=PRIME):
    """Fraction ``r/s`` congruent to ``a`` mod ``p`` with small ``|r|, s``; or ``None``."""
    a %= p
    bound = isqrt(p // 2)
    r0, r1 = p, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def _integer_rows(rows):
    out = []
    for r in rows:
        den = 1
        for x in r:
            if isinstance(x, Fraction):
                den = lcm(den, x.denominator)
        out.append([int(x * den) if den != 1 else int(x) for x in r])
    return out


def rref_q(rows, ncols):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    ints, pivots = rref_int(_integer_rows(rows), ncols)
    m = []
    for row, c in zip(ints, pivots):
        a = row[c]
        m.append([Fraction(x, a) if x else _ZERO for x in row])
    return m, pivots


def nullspace_q(rows, ncols):
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    m, pivots = rref_q(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -m[r][f]
        out.append(v)
    return out


def solve_q(rows, rhs, ncols):
    """One solution of ``rows * x = rhs`` (free unknowns zero) or ``None``."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = rref_q(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        x[c] = m[r][ncols]
    return x


def integer_vector(v):
    """Scale a rational vector to coprime integers."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints
