"""Vector fields, covector fields and distributions on a coordinate chart."""

from functools import cached_property

from .errors import ChartMismatch, GeometryError
from .expr import ONE, ZERO, as_expr
from .field_linalg import nullspace, primitive_vector, rref


class Chart:
    __slots__ = ("names", "_index")

    def __init__(self, names):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise GeometryError("chart coordinates must be unique")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        return self._index[name]

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Chart({list(self.names)})"


def _check(a, b):
    if a.chart != b.chart:
        raise ChartMismatch(f"{a.chart} vs {b.chart}")


class _Field:
    __slots__ = ("chart", "coeffs")
    _symbol = "?"

    def __init__(self, chart, coeffs):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        coeffs = tuple(as_expr(c) for c in coeffs)
        if len(coeffs) != chart.dim:
            raise GeometryError("coefficient count does not match chart dimension")
        self.chart = chart
        self.coeffs = coeffs

    @classmethod
    def from_dict(cls, chart, mapping):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        for k in mapping:
            if k not in chart:
                raise GeometryError(f"{k} is not a coordinate of {chart}")
        return cls(chart, [mapping.get(n, ZERO) for n in chart.names])

    @classmethod
    def basis(cls, chart, name):
        """Coordinate field (or differential) of ``name``."""
        return cls.from_dict(chart, {name: ONE})

    def __getitem__(self, name):
        return self.coeffs[self.chart.index(name)]

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other):
        _check(self, other)
        return type(self)(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        _check(self, other)
        return type(self)(self.chart, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return type(self)(self.chart, [-a for a in self.coeffs])

    def scale(self, f):
        f = as_expr(f)
        return type(self)(self.chart, [f * a for a in self.coeffs])

    def __rmul__(self, f):
        return self.scale(f)

    def primitive(self):
        """Same direction with coprime polynomial coefficients."""
        return type(self)(self.chart, primitive_vector(self.coeffs))

    def __eq__(self, other):
        return type(self) is type(other) and self.chart == other.chart and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.chart, self.coeffs))

    def to_strings(self):
        return [str(c) for c in self.coeffs]

    def __str__(self):
        parts = []
        for n, c in zip(self.chart.names, self.coeffs):
            if c.is_zero():
                continue
            s = str(c)
            basis = f"{self._symbol}{n}"
            if c == ONE:
                term = basis
            elif c == -ONE:
                term = "-" + basis
            elif len(c.num) > 1 and c.is_polynomial():
                term = f"({s})*{basis}"
            else:
                term = f"{s}*{basis}"
            parts.append(term)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


class VectorField(_Field):
    """Tangent vector field ``sum v^i d/dz^i``."""

    __slots__ = ()
    _symbol = "d_"

    def apply(self, g):
        """Directional derivative ``v(g)``."""
        g = as_expr(g)
        total = ZERO
        for n, c in zip(self.chart.names, self.coeffs):
            if c.is_zero() or not g.depends_on(n):
                continue
            total = total + c * g.diff(n)
        return total


class CovectorField(_Field):
    """Covector field ``sum w_i dz^i``."""

    __slots__ = ()
    _symbol = "d"

    @classmethod
    def differential(cls, chart, g):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        g = as_expr(g)
        return cls(chart, [g.diff(n) for n in chart.names])


def lie_bracket(v, w):
    _check(v, w)
    names = v.chart.names
    out = []
    for i in range(len(names)):
        wi, vi = w.coeffs[i], v.coeffs[i]
        total = ZERO
        for j, n in enumerate(names):
            vj, wj = v.coeffs[j], w.coeffs[j]
            if not vj.is_zero() and wi.depends_on(n):
                total = total + vj * wi.diff(n)
            if not wj.is_zero() and vi.depends_on(n):
                total = total - wj * vi.diff(n)
        out.append(total)
    return VectorField(v.chart, out)


def contract(v, omega):
    _check(v, omega)
    return sum((a * b for a, b in zip(v.coeffs, omega.coeffs) if not a.is_zero()), ZERO)


class Distribution:
    """Span of a list of vector fields.

    Generators are kept as given (zero fields dropped); rank and an echelon
    basis used for membership tests are computed lazily.
    """

    __slots__ = ("chart", "generators", "__dict__")

    def __init__(self, chart, generators=()):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        gens = []
        for g in generators:
            if g.chart != chart:
                raise ChartMismatch(f"{g.chart} vs {chart}")
            if not g.is_zero():
                gens.append(g)
        self.chart = chart
        self.generators = tuple(gens)

    @classmethod
    def coordinate(cls, chart, names):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        return cls(chart, [VectorField.basis(chart, n) for n in names])

    @classmethod
    def full(cls, chart):
        if not isinstance(chart, Chart):
            chart = Chart(chart)
        return cls.coordinate(chart, chart.names)

    @cached_property
    def _echelon(self):
        if not self.generators:
            return [], []
        return rref([list(g.coeffs) for g in self.generators])

    @property
    def rank(self):
        return len(self._echelon[1])

    dim = rank

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def contains(self, v):
        _check(self, v)
        if v.is_zero():
            return True
        rows, pivots = self._echelon
        w = list(v.coeffs)
        for r, c in pivots:
            f = w[c]
            if f.is_zero():
                continue
            row = rows[r]
            for j, x in enumerate(row):
                if not x.is_zero():
                    w[j] = w[j] - f * x
        return all(x.is_zero() for x in w)

    def contains_all(self, other):
        return all(self.contains(g) for g in other.generators)

    def span_equals(self, other):
        return self.rank == other.rank and self.contains_all(other)

    def basis(self):
        """An independent subset of the generators (greedy in order)."""
        chosen = []
        current = Distribution(self.chart)
        for g in self.generators:
            if not current.contains(g):
                chosen.append(g)
                current = Distribution(self.chart, chosen)
            if len(chosen) == self.rank:
                break
        return chosen

    def echelon_basis(self):
        """Normalized echelon basis (identity on pivot coordinates), sorted by pivot."""
        rows, pivots = self._echelon
        out = sorted(((c, VectorField(self.chart, rows[r])) for r, c in pivots), key=lambda t: t[0])
        return [v for _, v in out]

    def pivot_coordinates(self):
        return sorted(self.chart.names[c] for _, c in self._echelon[1])

    def extend(self, fields):
        return Distribution(self.chart, list(self.generators) + list(fields))

    def primitive(self):
        return Distribution(self.chart, [g.primitive() for g in self.generators])

    def to_strings(self):
        return [g.to_strings() for g in self.generators]

    def __str__(self):
        if not self.generators:
            return "span{0}"
        return "span{" + ", ".join(str(g) for g in self.generators) + "}"

    def __repr__(self):
        return f"Distribution({self})"


def span(chart, fields):
    return Distribution(chart, fields)


def contains_mod(v, D):
    return D.contains(v)


def is_involutive(D):
    basis = D.basis()
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not D.contains(lie_bracket(basis[i], basis[j])):
                return False
    return True


def annihilator(D):
    if not D.generators:
        return [CovectorField.basis(D.chart, n) for n in D.chart.names]
    ker = nullspace([list(g.coeffs) for g in D.generators])
    return [CovectorField(D.chart, w) for w in ker]


def is_symmetry(v, D):
    _check(v, D)
    return all(D.contains(lie_bracket(v, g)) for g in D.generators)


def _combine(chart, coeffs, basis):
    out = VectorField(chart, [ZERO] * chart.dim)
    for c, g in zip(coeffs, basis):
        if not c.is_zero():
            out = out + g.scale(c)
    return out


def cauchy_characteristic(D):
    """Largest ``C`` inside ``D`` with ``[C, D]`` contained in ``D``."""
    basis = D.basis()
    omegas = annihilator(D)
    if not omegas or not basis:
        return Distribution(D.chart, basis)
    brackets = {}
    rows = []
    for j, gj in enumerate(basis):
        for w in omegas:
            row = []
            for i, gi in enumerate(basis):
                key = (i, j)
                if key not in brackets:
                    brackets[key] = lie_bracket(gi, gj)
                row.append(contract(brackets[key], w))
            rows.append(row)
    sols = nullspace(rows)
    C = Distribution(D.chart, [_combine(D.chart, c, basis).primitive() for c in sols])
    return C


def adjusted_basis(D):
    """Pairwise commuting basis of an involutive distribution."""
    if not is_involutive(D):
        raise GeometryError("distribution is not involutive", code="NOT_INVOLUTIVE")
    basis = D.echelon_basis()
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not lie_bracket(basis[i], basis[j]).is_zero():
                raise GeometryError("echelon basis does not commute", code="NOT_INVOLUTIVE")
    return basis


def direct_sum(D, E):
    _check(D, E)
    S = Distribution(D.chart, list(D.generators) + list(E.generators))
    if S.rank != D.rank + E.rank:
        raise GeometryError("sum is not direct", code="NOT_DIRECT")
    return S


def sum_of(*dists):
    chart = dists[0].chart
    gens = []
    for d in dists:
        _check(d, dists[0])
        gens.extend(d.generators)
    return Distribution(chart, gens)


def complement(A, B, candidates=None):
    """Fields from ``candidates`` (default: generators of ``A``) completing ``B`` inside ``A``."""
    candidates = A.generators if candidates is None else candidates
    chosen = []
    current = B
    target = sum_of(A, B).rank
    for g in candidates:
        if current.rank >= target:
            break
        if not current.contains(g):
            chosen.append(g)
            current = current.extend([g])
    return Distribution(A.chart, chosen)


def complement_in(D, E):
    """Involutive ``E_c`` with ``D = E (+) E_c`` for involutive ``E`` inside ``D``."""
    _check(D, E)
    if not D.contains_all(E):
        raise GeometryError("E is not contained in D", code="NO_INVOLUTIVE_COMPLEMENT_FOUND")
    if D.rank == D.chart.dim:
        coords = [VectorField.basis(D.chart, n) for n in D.chart.names]
        Ec = complement(D, E, candidates=coords)
    else:
        Ec = complement(D, E, candidates=adjusted_basis(D))
    if Ec.rank + E.rank != D.rank or not is_involutive(Ec):
        raise GeometryError("no involutive complement found", code="NO_INVOLUTIVE_COMPLEMENT_FOUND")
    return Ec


def intersection(A, B):
    """``A`` intersected with ``B``, as combinations of a basis of ``A``."""
    _check(A, B)
    basis = A.basis()
    omegas = annihilator(B)
    if not omegas:
        return Distribution(A.chart, basis)
    if not basis:
        return Distribution(A.chart)
    rows = [[contract(g, w) for g in basis] for w in omegas]
    sols = nullspace(rows)
    return Distribution(A.chart, [_combine(A.chart, c, basis).primitive() for c in sols])


__all__ = [
    "Chart",
    "VectorField",
    "CovectorField",
    "Distribution",
    "span",
    "lie_bracket",
    "contract",
    "is_involutive",
    "annihilator",
    "is_symmetry",
    "cauchy_characteristic",
    "adjusted_basis",
    "direct_sum",
    "sum_of",
    "complement",
    "complement_in",
    "contains_mod",
    "intersection",
]
