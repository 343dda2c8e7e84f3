"""Pure-Python polynomial kernels.

Terms are dicts mapping exponent tuples to integer coefficients.  Every
function here has a drop-in twin in ``_ckernels.pyx``.
"""

from math import gcd
from operator import add

BACKEND = "python"

__all__ = ["BACKEND", "mul_terms", "add_terms", "diff_terms", "eval_terms", "embed_terms", "rank_mod", "nullspace_mod", "rref_int"]


def mul_terms(a, b):
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    bitems = list(b.items())
    for ea, ca in a.items():
        for eb, cb in bitems:
            e = tuple(map(add, ea, eb))
            out[e] = get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def add_terms(a, b, scale=1):
    """Return ``a + scale*b``."""
    out = dict(a)
    get = out.get
    for e, c in b.items():
        v = get(e, 0) + scale * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def diff_terms(terms, i):
    out = {}
    for e, c in terms.items():
        k = e[i]
        if k:
            e2 = list(e)
            e2[i] = k - 1
            out[tuple(e2)] = c * k
    return out


def eval_terms(terms, values):
    """Evaluate at ``values`` (one per generator); works for any ring type."""
    n = len(values)
    cache = [{} for _ in range(n)]
    total = 0
    for e, c in terms.items():
        t = c
        for i in range(n):
            k = e[i]
            if k:
                pw = cache[i].get(k)
                if pw is None:
                    pw = values[i] ** k
                    cache[i][k] = pw
                t = t * pw
        total = total + t
    return total


def embed_terms(terms, positions, n):
    """Re-index exponents: slot ``j`` of the source goes to ``positions[j]``."""
    out = {}
    for e, c in terms.items():
        e2 = [0] * n
        for j, k in enumerate(e):
            if k:
                e2[positions[j]] = k
        out[tuple(e2)] = c
    return out


def rank_mod(rows, ncols, p):
    """Rank of an integer matrix modulo the prime ``p`` (rows are lists)."""
    m = [[x % p for x in r] for r in rows]
    rank = 0
    nrows = len(m)
    for col in range(ncols):
        piv = -1
        for r in range(rank, nrows):
            if m[r][col]:
                piv = r
                break
        if piv < 0:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        inv = pow(prow[col], p - 2, p)
        for r in range(rank + 1, nrows):
            row = m[r]
            f = row[col]
            if f:
                f = f * inv % p
                for c in range(col, ncols):
                    row[c] = (row[c] - f * prow[c]) % p
        rank += 1
        if rank == nrows:
            break
    return rank


def nullspace_mod(rows, ncols, p):
    """Null-space basis of an integer matrix modulo the prime ``p``."""
    m = [[x % p for x in r] for r in rows]
    nrows = len(m)
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = -1
        for r in range(rank, nrows):
            if m[r][col]:
                piv = r
                break
        if piv < 0:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        inv = pow(prow[col], p - 2, p)
        for c in range(col, ncols):
            prow[c] = prow[c] * inv % p
        for r in range(nrows):
            if r == rank:
                continue
            row = m[r]
            f = row[col]
            if f:
                for c in range(col, ncols):
                    row[c] = (row[c] - f * prow[c]) % p
        pivots.append(col)
        rank += 1
        if rank == nrows:
            break
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [0] * ncols
        v[free] = 1
        for r, c in enumerate(pivots):
            v[c] = (-m[r][free]) % p
        basis.append(v)
    return basis


def rref_int(rows, ncols):
    """Fraction-free Gauss-Jordan on an integer matrix.

    Returns ``(rows, pivots)``: row ``r`` has its pivot in column
    ``pivots[r]`` and zeros in every other pivot column; rows are primitive
    with a positive pivot.  Zero rows are dropped.
    """
    m = [list(r) for r in rows if any(r)]
    nrows = len(m)
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = -1
        best = None
        for r in range(rank, nrows):
            v = m[r][col]
            if v and (best is None or abs(v) < best):
                piv, best = r, abs(v)
        if piv < 0:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        a = prow[col]
        for r in range(nrows):
            if r == rank:
                continue
            row = m[r]
            b = row[col]
            if b:
                g = gcd(a, b)
                fa, fb = a // g, b // g
                for c in range(ncols):
                    row[c] = fa * row[c] - fb * prow[c]
                g = 0
                for x in row:
                    if x:
                        g = gcd(g, x)
                        if g == 1:
                            break
                if g > 1:
                    m[r] = [x // g for x in row]
        pivots.append(col)
        rank += 1
        if rank == nrows:
            break
    out = []
    for r in range(rank):
        row = m[r]
        g = 0
        for x in row:
            g = gcd(g, x)
        if row[pivots[r]] < 0:
            g = -g
        out.append([x // g for x in row])
    return out, pivots
