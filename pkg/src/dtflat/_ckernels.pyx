# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Coefficients stay Python integers (they can grow without bound); the speedup
comes from typed loops over exponents and from machine-word arithmetic in the
modular eliminations.
"""

from libc.stdlib cimport free, malloc
from math import gcd

BACKEND = "cython"

__all__ = ["BACKEND", "mul_terms", "add_terms", "diff_terms", "eval_terms", "embed_terms", "rank_mod", "nullspace_mod", "rref_int"]


def mul_terms(dict a, dict b):
    if len(a) > len(b):
        a, b = b, a
    cdef dict out = {}
    cdef list bkeys = list(b.keys())
    cdef list bvals = list(b.values())
    cdef Py_ssize_t nb = len(bkeys), j, i, n
    cdef tuple ea, eb
    cdef object ca, e, v
    cdef list tmp
    for ea, ca in a.items():
        n = len(ea)
        for j in range(nb):
            eb = <tuple>bkeys[j]
            tmp = [0] * n
            for i in range(n):
                tmp[i] = <long>ea[i] + <long>eb[i]
            e = tuple(tmp)
            v = out.get(e)
            if v is None:
                out[e] = ca * bvals[j]
            else:
                out[e] = v + ca * bvals[j]
    return {k: c for k, c in out.items() if c}


def add_terms(dict a, dict b, scale=1):
    """Return ``a + scale*b``."""
    cdef dict out = dict(a)
    cdef object e, c, v
    if scale == 1:
        for e, c in b.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return out
    for e, c in b.items():
        v = out.get(e, 0) + scale * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def diff_terms(dict terms, Py_ssize_t i):
    cdef dict out = {}
    cdef tuple e
    cdef long k
    cdef list e2
    for e, c in terms.items():
        k = e[i]
        if k:
            e2 = list(e)
            e2[i] = k - 1
            out[tuple(e2)] = c * k
    return out


def eval_terms(dict terms, values):
    """Evaluate at ``values`` (one per generator); works for any ring type."""
    cdef list vals = list(values)
    cdef Py_ssize_t n = len(vals), i
    cdef list cache = [{} for _ in range(n)]
    cdef object total = 0, t, pw
    cdef tuple e
    cdef long k
    for e, c in terms.items():
        t = c
        for i in range(n):
            k = e[i]
            if k:
                pw = (<dict>cache[i]).get(k)
                if pw is None:
                    pw = vals[i] ** k
                    (<dict>cache[i])[k] = pw
                t = t * pw
        total = total + t
    return total


def embed_terms(dict terms, positions, Py_ssize_t n):
    """Re-index exponents: slot ``j`` of the source goes to ``positions[j]``."""
    cdef dict out = {}
    cdef list pos = list(positions)
    cdef tuple e
    cdef list e2
    cdef Py_ssize_t j, m = len(pos)
    for e, c in terms.items():
        e2 = [0] * n
        for j in range(m):
            if e[j]:
                e2[<Py_ssize_t>pos[j]] = e[j]
        out[tuple(e2)] = c
    return out


cdef long long _inv(long long a, long long p):
    cdef long long result = 1, e = p - 2
    a %= p
    while e:
        if e & 1:
            result = result * a % p
        a = a * a % p
        e >>= 1
    return result


cdef long long* _load(rows, Py_ssize_t nrows, Py_ssize_t ncols, long long p) except NULL:
    cdef long long* m = <long long*>malloc(max(nrows * ncols, 1) * sizeof(long long))
    if m == NULL:
        raise MemoryError()
    cdef Py_ssize_t r, c
    for r in range(nrows):
        row = rows[r]
        for c in range(ncols):
            m[r * ncols + c] = row[c] % p
    return m


cdef Py_ssize_t _eliminate(long long* m, Py_ssize_t nrows, Py_ssize_t ncols, long long p,
                           bint full, Py_ssize_t* pivots):
    cdef Py_ssize_t rank = 0, col, r, c, piv
    cdef long long inv, f, tmp
    for col in range(ncols):
        piv = -1
        for r in range(rank, nrows):
            if m[r * ncols + col]:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(ncols):
                tmp = m[piv * ncols + c]
                m[piv * ncols + c] = m[rank * ncols + c]
                m[rank * ncols + c] = tmp
        inv = _inv(m[rank * ncols + col], p)
        if full:
            for c in range(col, ncols):
                m[rank * ncols + c] = m[rank * ncols + c] * inv % p
            inv = 1
        for r in range(0 if full else rank + 1, nrows):
            if r == rank:
                continue
            f = m[r * ncols + col]
            if f:
                f = f * inv % p
                for c in range(col, ncols):
                    m[r * ncols + c] = (m[r * ncols + c] - f * m[rank * ncols + c]) % p
                    if m[r * ncols + c] < 0:
                        m[r * ncols + c] += p
        pivots[rank] = col
        rank += 1
        if rank == nrows:
            break
    return rank


def rank_mod(rows, Py_ssize_t ncols, long long p):
    """Rank of an integer matrix modulo the prime ``p`` (rows are lists)."""
    cdef Py_ssize_t nrows = len(rows)
    if nrows == 0 or ncols == 0:
        return 0
    cdef long long* m = _load(rows, nrows, ncols, p)
    cdef Py_ssize_t* pivots = <Py_ssize_t*>malloc(nrows * sizeof(Py_ssize_t))
    try:
        return _eliminate(m, nrows, ncols, p, False, pivots)
    finally:
        free(m)
        free(pivots)


def nullspace_mod(rows, Py_ssize_t ncols, long long p):
    """Null-space basis of an integer matrix modulo the prime ``p``."""
    cdef Py_ssize_t nrows = len(rows), rank = 0, r, free_c
    cdef long long* m = NULL
    cdef Py_ssize_t* pivots = NULL
    cdef list basis = []
    cdef list v
    cdef set pivset
    if nrows == 0:
        for free_c in range(ncols):
            v = [0] * ncols
            v[free_c] = 1
            basis.append(v)
        return basis
    m = _load(rows, nrows, ncols, p)
    pivots = <Py_ssize_t*>malloc(nrows * sizeof(Py_ssize_t))
    try:
        rank = _eliminate(m, nrows, ncols, p, True, pivots)
        pivset = {pivots[r] for r in range(rank)}
        for free_c in range(ncols):
            if free_c in pivset:
                continue
            v = [0] * ncols
            v[free_c] = 1
            for r in range(rank):
                v[pivots[r]] = (p - m[r * ncols + free_c]) % p
            basis.append(v)
        return basis
    finally:
        free(m)
        free(pivots)


def rref_int(rows, Py_ssize_t ncols):
    """Fraction-free Gauss-Jordan on an integer matrix (see the Python twin)."""
    cdef list m = []
    cdef Py_ssize_t nrows, rank = 0, col, r, c, piv
    cdef list pivots = []
    cdef list row, prow, out
    cdef object a, b, g, fa, fb, v, best, x, src
    for src in rows:
        row = list(src)
        for x in row:
            if x:
                m.append(row)
                break
    nrows = len(m)
    for col in range(ncols):
        piv = -1
        best = None
        for r in range(rank, nrows):
            v = (<list>m[r])[col]
            if v and (best is None or abs(v) < best):
                piv = r
                best = abs(v)
        if piv < 0:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = <list>m[rank]
        a = prow[col]
        for r in range(nrows):
            if r == rank:
                continue
            row = <list>m[r]
            b = row[col]
            if b:
                g = gcd(a, b)
                fa = a // g
                fb = b // g
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
        row = <list>m[r]
        g = 0
        for x in row:
            g = gcd(g, x)
        if row[<Py_ssize_t>pivots[r]] < 0:
            g = -g
        out.append([x // g for x in row])
    return out, pivots
