"""Linear algebra over the field of rational functions.

Rank always means generic rank: the rank over Q(z), which agrees with the
pointwise rank off a proper algebraic subset.
"""

from .expr import ONE, ZERO, Expr, as_expr
from .poly import Poly, cofactors, divide_exact


class FieldMatrix:
    """Rectangular grid of :class:`Expr` with optional row/column labels."""

    __slots__ = ("rows", "ncols", "row_labels", "col_labels")

    def __init__(self, rows, ncols=None, row_labels=None, col_labels=None):
        rows = [[as_expr(x) for x in r] for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
        self.rows = rows
        self.ncols = ncols
        self.row_labels = row_labels
        self.col_labels = col_labels

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def shape(self):
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self):
        cols = [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)]
        return FieldMatrix(cols, self.nrows, self.col_labels, self.row_labels)

    def apply(self, vec):
        return [sum((a * b for a, b in zip(r, vec)), ZERO) for r in self.rows]

    def is_zero(self):
        return all(x.is_zero() for r in self.rows for x in r)

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"FieldMatrix([{body}])"


def _as_rows(M):
    if isinstance(M, FieldMatrix):
        return [list(r) for r in M.rows], M.ncols
    rows = [[as_expr(x) for x in r] for r in M]
    return rows, (len(rows[0]) if rows else 0)


def _pivot_key(x, r, c):
    return (x.complexity(), len(x.num) + len(x.den), c, r)


def rref(M, pivot_cols=None):
    """Reduced row echelon form.

    Pivots are picked over the whole remaining block: lowest-degree nonzero
    entry first, ties broken by column then row.  ``pivot_cols`` restricts the
    columns that may carry a pivot (used for augmented systems).

    Returns ``(rows, pivots)`` with ``pivots`` a list of ``(row, col)``; the
    first ``len(pivots)`` rows are the nonzero ones.
    """
    rows, ncols = _as_rows(M)
    allowed = list(range(ncols)) if pivot_cols is None else list(pivot_cols)
    nrows = len(rows)
    pivots = []
    used_cols = set()
    k = 0
    while k < nrows:
        best = None
        for r in range(k, nrows):
            row = rows[r]
            for c in allowed:
                if c in used_cols:
                    continue
                x = row[c]
                if x.is_zero():
                    continue
                key = _pivot_key(x, r, c)
                if best is None or key < best[0]:
                    best = (key, r, c)
        if best is None:
            break
        _, r, c = best
        rows[k], rows[r] = rows[r], rows[k]
        inv = rows[k][c].inverse()
        prow = [x * inv if not x.is_zero() else x for x in rows[k]]
        prow[c] = ONE
        rows[k] = prow
        nz = [j for j in range(ncols) if not prow[j].is_zero()]
        for i in range(nrows):
            if i == k:
                continue
            f = rows[i][c]
            if f.is_zero():
                continue
            row = rows[i]
            for j in nz:
                row[j] = row[j] - f * prow[j]
            row[c] = ZERO
        pivots.append((k, c))
        used_cols.add(c)
        k += 1
    return rows, pivots


def rank(M):
    rows, _ = _as_rows(M)
    if not rows:
        return 0
    return len(rref(rows)[1])


def primitive_vector(vec):
    """Scale a field vector to coprime polynomial entries, first nonzero lc > 0."""
    vec = [as_expr(x) for x in vec]
    nz = [x for x in vec if not x.is_zero()]
    if not nz:
        return vec
    # common denominator
    den = Poly.const(1)
    for x in nz:
        if not x.den.is_const() or x.den.const_value() != 1:
            g, _, b = cofactors(den, x.den)
            den = den * b
    polys = []
    for x in vec:
        if x.is_zero():
            polys.append(Poly())
        else:
            polys.append(divide_exact(x.num * den, x.den))
    g = Poly()
    for p in polys:
        if not p.is_zero():
            g = cofactors(g, p)[0]
            if g.is_const() and g.const_value() == 1:
                break
    first = next(p for p in polys if not p.is_zero())
    sign = -1 if first.lc() < 0 else 1
    out = []
    for p in polys:
        if p.is_zero():
            out.append(ZERO)
        else:
            q = divide_exact(p, g)
            out.append(Expr(q.scale(sign)))
    return out


def nullspace(M):
    """Basis of the right null space; vectors are primitive polynomial vectors."""
    rows, ncols = _as_rows(M)
    if not rows:
        return [[ONE if j == i else ZERO for j in range(ncols)] for i in range(ncols)]
    R, pivots = rref(rows)
    pcols = {c: r for r, c in pivots}
    basis = []
    for f in range(ncols):
        if f in pcols:
            continue
        v = [ZERO] * ncols
        v[f] = ONE
        for c, r in pcols.items():
            v[c] = -R[r][f]
        basis.append(primitive_vector(v))
    return basis


def left_nullspace(M):
    rows, ncols = _as_rows(M)
    if not rows:
        return []
    return nullspace(FieldMatrix(rows, ncols).transpose())


def solve_linear(M, b):
    """One solution of ``M x = b`` (free unknowns set to zero), or ``None``."""
    rows, ncols = _as_rows(M)
    b = [as_expr(x) for x in b]
    if len(b) != len(rows):
        raise ValueError("dimension mismatch")
    aug = [r + [bi] for r, bi in zip(rows, b)]
    R, pivots = rref(aug, pivot_cols=range(ncols)) if aug else ([], [])
    k = len(pivots)
    for r in R[k:]:
        if not r[ncols].is_zero():
            return None
    x = [ZERO] * ncols
    for r, c in pivots:
        x[c] = R[r][ncols]
    return x


def is_zero_vector(vec):
    return all(x.is_zero() for x in vec)


__all__ = [
    "FieldMatrix",
    "rref",
    "rank",
    "nullspace",
    "left_nullspace",
    "solve_linear",
    "primitive_vector",
    "is_zero_vector",
]
