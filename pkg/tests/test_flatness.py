import pytest

from dtflat import Distribution, SampledSystem, lie_bracket, parse
from dtflat import flatness as fl
from dtflat.errors import ModelError
from dtflat.geometry import sum_of
from dtflat.system import input_distribution, kernel_distribution

from _util import span, vf

P = parse


def test_condition_full(ex1, ex2, nonflat):
    assert fl.check_condition_full(ex1)
    assert not fl.check_condition_full(ex2)
    assert not fl.check_condition_full(nonflat)


def test_find_uhat_examples(ex1, nonflat):
    U, K = input_distribution(ex1), kernel_distribution(ex1)
    assert fl.find_Uhat(U, Distribution(ex1.chart), K).span_equals(U)
    U, K = input_distribution(nonflat), kernel_distribution(nonflat)
    assert fl.find_Uhat(U, Distribution(nonflat.chart), K).rank == 0


def test_find_uhat_is_fixed_point(ex2):
    U, K = input_distribution(ex2), kernel_distribution(ex2)
    W = fl.find_Uhat(U, Distribution(ex2.chart), K)
    assert W.rank == 1
    WK = sum_of(W, K)
    for w in W.generators:
        for k in K.generators:
            assert WK.contains(lie_bracket(w, k))
    assert fl.find_Uhat(W, Distribution(ex2.chart), K).span_equals(W)


def test_detect_redundant_stage(ex1):
    K = kernel_distribution(ex1)
    R = span(ex1.chart, vf(ex1.chart, x1="x1", x2="x2"))
    A = span(ex1.chart, vf(ex1.chart, u=1), vf(ex1.chart, x1="x1", x2="x2"))
    Y, Us = fl.detect_redundant_stage(A, R, K)
    assert Y.rank == 1 and Us.rank == 1
    assert Y.contains(vf(ex1.chart, x1="x1", x2="x2"))
    Y, Us = fl.detect_redundant_stage(input_distribution(ex1), Distribution(ex1.chart), K)
    assert Y.rank == 0 and Us.rank == 1


def test_flat_ex1(ex1):
    r = fl.test_flat(ex1)
    assert r.verdict == fl.FLAT and r.is_flat
    assert r.passes == 3
    assert [t.kappa_after for t in r.traces] == [1, 0, 0]
    assert r.R_final.span_equals(span(ex1.chart, vf(ex1.chart, u=1), vf(ex1.chart, x1="x1", x2="x2")))
    assert r.Y_final.span_equals(span(ex1.chart, vf(ex1.chart, x1=1)))
    assert fl.flat_outputs(r) == [P("x1/x2")]
    assert r.extraction_status == "FOUND"


def test_flat_ex2(ex2):
    r = fl.test_flat(ex2)
    assert r.verdict == fl.FLAT
    assert r.passes == 4
    assert sum(t.Uhat.rank for t in r.traces) == ex2.n
    c = ex2.chart
    ref = span(c, vf(c, x1=1, x2="-x2/x1"), vf(c, x3=1, x4=1), vf(c, u1=1), vf(c, u2=1))
    assert r.R_final.span_equals(ref)
    assert r.Y_final.span_equals(span(c, vf(c, x1=1), vf(c, x3=1)))
    assert fl.flat_outputs(r) == [P("x1*x2"), P("x3 - x4")]


def test_not_flat(nonflat):
    r = fl.test_flat(nonflat)
    assert r.verdict == fl.NOT_FLAT
    assert r.traces[0].Uhat.rank == 0
    assert fl.flat_outputs(r) is None
    assert r.extraction_status == "SKIPPED"


def test_chain_and_redundant_input():
    s = SampledSystem(["x1", "x2"], ["u", "w"], ["x2", "u + w"])
    r = fl.test_flat(s)
    assert r.verdict == fl.FLAT
    assert r.redundant_inputs == ("w",)
    outs = fl.flat_outputs(r)
    assert outs[-1] == P("w") and len(outs) == 2


def test_not_submersion_rejected():
    with pytest.raises(ModelError):
        fl.test_flat(SampledSystem(["x1", "x2"], ["u"], ["u", "2*u"]))


def test_extract_first_integrals(ex1):
    R = span(ex1.chart, vf(ex1.chart, u=1), vf(ex1.chart, x1="x1", x2="x2"))
    (p,) = fl.extract_first_integrals(R, 1)
    for v in R.generators:
        assert v.apply(p).is_zero()
    assert not p.is_constant()
    with pytest.raises(fl.IntegrationFailed):
        fl.extract_first_integrals(R, 2)


def test_normalize_flat_outputs(ex1):
    R = span(ex1.chart, vf(ex1.chart, u=1), vf(ex1.chart, x1="x1", x2="x2"))
    Y = span(ex1.chart, vf(ex1.chart, x1=1))
    outs, note = fl.normalize_flat_outputs([P("x2/x1")], Y, R)
    assert note is None
    (y,) = outs
    assert vf(ex1.chart, x1=1).apply(y).is_zero() is False
    assert y == P("x1/x2")
    outs, note = fl.normalize_flat_outputs([P("x2/x1")], Distribution(ex1.chart), R)
    assert note == "NORMALIZATION_SKIPPED"


def test_decompose_series_ex1(ex1):
    d = fl.decompose_series(ex1)
    assert d.mode == "full"
    assert d.g == [P("x1 + x2"), P("x2*u")]
    assert d.h == [P("xt1^3*xt2"), P("xt2")]
    assert d.recompose(ex1) == list(ex1.f)
    assert d.complement.f == (P("xt1^3*xt2 + xt2"),)


def test_decompose_series_hints(ex1):
    d = fl.decompose_series(ex1, hints=[P("x1 + x2")])
    assert d.g[0] == P("x1 + x2")
    with pytest.raises(ModelError) as info:
        fl.decompose_series(ex1, hints=[P("x1")])
    assert info.value.code == "HINT_INVALID"


def test_decompose_series_ex2_partial(ex2):
    d = fl.decompose_series(ex2)
    assert d.mode == "partial"
    assert d.recompose(ex2) == list(ex2.f)
    assert len(d.brunovsky_states) == 1
    assert d.complement.n == 3 and set(d.v_inputs) == {"v1"}
    with pytest.raises(ModelError) as info:
        fl.decompose_series(ex2, mode="full")
    assert info.value.code == "CONDITION_FAILED"


def test_construct(ex1, ex2):
    c = fl.construct(ex2)
    assert c.status == "FOUND"
    assert set(c.flat_outputs) == {P("x1*x2"), P("x3 - x4")}
    c = fl.construct(ex1)
    assert c.status == "FOUND" and len(c.levels) == 2
    # the last coordinate change is a cube root: reported in intermediate coordinates
    assert c.notes
