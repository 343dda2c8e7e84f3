import pytest

from dtflat import (
    Chart,
    CovectorField,
    Distribution,
    VectorField,
    adjusted_basis,
    annihilator,
    cauchy_characteristic,
    input_distribution,
    is_involutive,
    is_symmetry,
    kernel_distribution,
    lie_bracket,
    parse,
)
from dtflat.errors import ChartMismatch, GeometryError
from dtflat.geometry import complement_in, contains_mod, contract, direct_sum, intersection

from _util import span, vf

C = Chart(["x1", "x2", "u"])
C2 = Chart(["x1", "x2"])
C3 = Chart(["x1", "x2", "x3"])


def d(chart, name):
    return VectorField.basis(chart, name)


def test_bracket_examples():
    assert lie_bracket(d(C2, "x1"), d(C2, "x2")).is_zero()
    v = vf(C, u=1)
    w = vf(C, x1="2*x2*u^2", x2=-1)
    assert lie_bracket(v, w) == vf(C, x1="4*x2*u")


def test_bracket_leibniz_instance():
    f = parse("x1*u + 1")
    v = vf(C, x1="x2", u="x1")
    w = vf(C, x2="u^2", x1=1)
    lhs = lie_bracket(v.scale(f), w)
    rhs = lie_bracket(v, w).scale(f) - v.scale(w.apply(f))
    assert lhs == rhs


def test_chart_mismatch():
    with pytest.raises(ChartMismatch):
        lie_bracket(d(C, "x1"), d(C2, "x1"))
    with pytest.raises(ChartMismatch):
        contract(d(C, "x1"), CovectorField.basis(C2, "x1"))


def test_contract_examples():
    assert contract(d(C2, "x1"), CovectorField.basis(C2, "x1")) == parse("1")
    v = vf(C2, x1="x2", x2="-x1")
    w = CovectorField(C2, [parse("x1"), parse("x2")])
    assert contract(v, w).is_zero()
    a = parse("x1 + 3")
    assert contract(v, w.scale(a)) == a * contract(v, w)


def test_involutive_examples():
    assert is_involutive(span(C3, d(C3, "x1"), d(C3, "x2")))
    # [d_x1, x1 d_x2] = d_x2 lies in the span wherever x1 != 0
    assert is_involutive(span(C3, d(C3, "x1"), vf(C3, x2="x1")))
    assert is_involutive(span(C3, vf(C3, x1="x2", x3="x1^2")))


def test_non_involutive_three_coordinates():
    D = span(C3, d(C3, "x1"), vf(C3, x2="x1", x3=1))
    assert not is_involutive(D)
    with pytest.raises(GeometryError) as info:
        adjusted_basis(D)
    assert info.value.code == "NOT_INVOLUTIVE"


def test_annihilator_examples():
    D = span(C, d(C, "u"), vf(C, x1="x1", x2="x2"))
    (w,) = annihilator(D)
    ref = CovectorField(C, [parse("x2"), parse("-x1"), parse("0")])
    ratio = w.coeffs[0] / ref.coeffs[0]
    assert all((a - ratio * b).is_zero() for a, b in zip(w.coeffs, ref.coeffs))
    assert annihilator(Distribution.full(C)) == []
    (w,) = annihilator(span(C2, d(C2, "x1")))
    assert w.coeffs[0].is_zero() and not w.coeffs[1].is_zero()


def test_symmetry_examples():
    R = span(C, d(C, "u"), vf(C, x1="x1", x2="x2"))
    assert is_symmetry(vf(C, x1="x2"), R)
    assert not is_symmetry(d(C, "x1"), R)
    assert is_symmetry(d(C2, "x1"), span(C2, d(C2, "x1")))
    D = span(C3, d(C3, "x1"), vf(C3, x2="x3"))
    assert is_symmetry(vf(C3, x1="x3", x2="x2"), D)


def test_cauchy_characteristic():
    D = span(C3, d(C3, "x1"), d(C3, "x2"))
    assert cauchy_characteristic(D).span_equals(D)
    N = span(C3, d(C3, "x1"), vf(C3, x2="x1", x3=1))
    Cc = cauchy_characteristic(N)
    assert N.contains_all(Cc)
    assert is_involutive(Cc)
    for c in Cc.generators:
        for g in N.generators:
            assert N.contains(lie_bracket(c, g))
    assert Cc.rank == 0
    one = span(C3, vf(C3, x1="x2", x3=1))
    assert cauchy_characteristic(one).span_equals(one)


def test_cauchy_characteristic_rank_two_in_four():
    C4 = Chart(["a", "b", "c", "e"])
    # contact-like: span{d_a, d_b + a d_c, d_e}; d_e commutes with both
    D = span(C4, d(C4, "a"), vf(C4, b=1, c="a"), d(C4, "e"))
    Cc = cauchy_characteristic(D)
    assert Cc.span_equals(span(C4, d(C4, "e")))


def test_adjusted_basis_examples():
    D = span(C2, d(C2, "x1"), vf(C2, x1=1, x2=1))
    b = adjusted_basis(D)
    assert b == [d(C2, "x1"), d(C2, "x2")]
    D = span(C, vf(C, x1="x1", x2="x2"), d(C, "u"))
    b = adjusted_basis(D)
    assert b == [vf(C, x1=1, x2="x2/x1"), d(C, "u")]
    assert lie_bracket(b[0], b[1]).is_zero()
    (single,) = adjusted_basis(span(C2, vf(C2, x1="2*x2", x2="4")))
    assert single == vf(C2, x1="x2/2", x2=1)


def test_direct_sum_and_complement(ex1):
    assert direct_sum(span(C2, d(C2, "x1")), span(C2, d(C2, "x2"))).rank == 2
    with pytest.raises(GeometryError) as info:
        direct_sum(span(C2, d(C2, "x1")), span(C2, vf(C2, x1=2)))
    assert info.value.code == "NOT_DIRECT"
    Ec = complement_in(Distribution.full(C), span(C, d(C, "u")))
    assert Ec.span_equals(span(C, d(C, "x1"), d(C, "x2")))
    U, K = input_distribution(ex1), kernel_distribution(ex1)
    assert direct_sum(U, K).rank == 2


def test_complement_in_failure():
    D = span(C2, d(C2, "x1"))
    with pytest.raises(GeometryError) as info:
        complement_in(D, span(C2, d(C2, "x2")))
    assert info.value.code == "NO_INVOLUTIVE_COMPLEMENT_FOUND"


def test_contains_mod_examples():
    D = span(C, d(C, "u"), vf(C, x1="2*x2*u^2", x2=-1))
    assert contains_mod(d(C, "u"), D)
    assert not contains_mod(vf(C, x1="4*x2*u"), D)
    assert contains_mod(VectorField(C, ["0", "0", "0"]), D)


def test_intersection():
    A = span(C3, d(C3, "x1"), d(C3, "x2"))
    B = span(C3, vf(C3, x1=1, x2=1), d(C3, "x3"))
    I = intersection(A, B)
    assert I.span_equals(span(C3, vf(C3, x1=1, x2=1)))
