import math
import random
from fractions import Fraction

import pytest

from dtflat import ZERO, Expr, parse
from dtflat.errors import EvaluationError, ExprError, ParseError
from dtflat.expr import diff, eval_at, substitute

from _util import rand_point, rand_poly_text


def test_parse_ex1_first_equation():
    e = parse("(x1 + x2)^3 * x2 * u")
    assert e.is_polynomial()
    # (x1+x2)^3 expands to 4 monomials, each times x2*u
    assert len(e.num) == 4
    assert set(e.free_symbols) == {"u", "x1", "x2"}
    assert e == parse("x1^3*x2*u + 3*x1^2*x2^2*u + 3*x1*x2^3*u + x2^4*u")


def test_parse_zero_and_cancellation():
    assert parse("0").is_zero()
    assert parse("x1/x2 - x1/x2").is_zero()
    assert parse("x1/x2 - x1/x2") == ZERO


def test_parse_canonical_gcd():
    e = parse("(x1^2 - x2^2)/(x1 - x2)")
    assert e == parse("x1 + x2")
    assert e.den.is_const()


def test_denominator_sign_normalized():
    a = parse("1/(-x1)")
    b = parse("-1/x1")
    assert a == b
    assert a.den.lc() > 0


@pytest.mark.parametrize(
    "text,code",
    [
        ("x1 +", "SYNTAX_ERROR"),
        ("(x1", "SYNTAX_ERROR"),
        ("x1 $ 2", "SYNTAX_ERROR"),
        ("x1^x2", "NONINTEGER_EXPONENT"),
        ("x1^(1/2)", "NONINTEGER_EXPONENT"),
        ("x1/0", "DIVISION_BY_ZERO_LITERAL"),
    ],
)
def test_parse_errors(text, code):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.code == code


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("x1 + * x2")
    assert info.value.position is not None


def test_rational_literals_and_negative_powers():
    assert parse("3/6*x") == parse("x/2")
    assert parse("x^-2") == parse("1/x^2")
    assert parse("-x^2") == -parse("x^2")


def test_diff_examples():
    e = parse("(x1 + x2)^3*x2*u")
    assert diff(e, "x1") == parse("3*(x1 + x2)^2*x2*u")
    assert diff(parse("x1/x2"), "x2") == parse("-x1/x2^2")
    assert diff(parse("7/3"), "x1").is_zero()
    assert diff(parse("x2"), "x1").is_zero()


def test_substitute_examples():
    assert substitute(parse("x1*u"), {"x1": parse("x1 + x2")}) == parse("(x1 + x2)*u")
    shifted = parse("x1_1/x1_2")
    out = substitute(shifted, {"x1_1": parse("(x1 + x2)^3*x2*u"), "x1_2": parse("x2*u")})
    assert out == parse("(x1 + x2)^3")
    e = parse("x1^2/(x2 + 1)")
    assert substitute(e, {}) == e
    assert substitute(e, {"x1": parse("x1")}) == e


def test_substitute_is_simultaneous():
    e = parse("x1 - 2*x2")
    assert substitute(e, {"x1": parse("x2"), "x2": parse("x1")}) == parse("x2 - 2*x1")


def test_substitute_zero_denominator():
    with pytest.raises(ExprError) as info:
        substitute(parse("1/(x1 - x2)"), {"x1": parse("x2")})
    assert info.value.code == "RESULT_DENOMINATOR_ZERO"


def test_eval_examples():
    assert eval_at(parse("(x1 + x2)^3*x2*u"), {"x1": 1, "x2": 1, "u": 1}) == 8
    assert eval_at(parse("x1/x2"), {"x1": 2, "x2": 4}) == Fraction(1, 2)
    with pytest.raises(EvaluationError) as info:
        eval_at(parse("1/x2"), {"x2": 0})
    assert info.value.code == "SINGULAR_POINT"
    with pytest.raises(EvaluationError) as info:
        eval_at(parse("1/x2"), {"x2": 1e-14})
    assert info.value.code == "SINGULAR_POINT"
    with pytest.raises(EvaluationError) as info:
        eval_at(parse("x1 + x2"), {"x1": 1})
    assert info.value.code == "UNBOUND_VARIABLE"


def test_float_and_complex_evaluation():
    e = parse("x1^2/(1 + x2)")
    assert math.isclose(e.eval_at({"x1": 1.5, "x2": 0.5}), 1.5)
    z = e.eval_at({"x1": 1.0 + 1e-20j, "x2": 0.0})
    assert math.isclose(z.imag / 1e-20, 2.0)


def test_integer_powers_and_inverse():
    x = Expr.symbol("x")
    assert (x ** 3) / x == x ** 2
    assert (x ** -1) * x == parse("1")
    with pytest.raises(ExprError):
        ZERO.inverse()


def _random_exprs(rng, count, names=("x1", "x2", "u")):
    out = []
    for _ in range(count):
        num = rand_poly_text(rng, list(names))
        den = parse(rand_poly_text(rng, list(names), terms=2))
        while den.is_zero():
            den = parse(rand_poly_text(rng, list(names), terms=2))
        e = parse(num) / den if rng.random() < 0.6 else parse(num)
        out.append(e)
    return out


def test_print_parse_round_trip_100():
    rng = random.Random(1)
    for e in _random_exprs(rng, 100):
        assert parse(str(e)) == e


def test_ring_axioms():
    rng = random.Random(2)
    ex = _random_exprs(rng, 30)
    for a, b, c in zip(ex[0::3], ex[1::3], ex[2::3]):
        assert a + b == b + a
        assert a * (b + c) == a * b + a * c
        assert (a - a).is_zero()


def test_derivation_axioms():
    rng = random.Random(3)
    ex = _random_exprs(rng, 20)
    for a, b in zip(ex[0::2], ex[1::2]):
        for v in ("x1", "u"):
            assert diff(a * b, v) == diff(a, v) * b + a * diff(b, v)
            assert diff(a + b, v) == diff(a, v) + diff(b, v)


def test_canonical_equality_matches_numeric():
    rng = random.Random(4)
    ex = _random_exprs(rng, 40)
    pairs = 0
    for a, b in zip(ex[0::2], ex[1::2]):
        if a == b:
            continue
        for _ in range(20):
            pt = rand_point(("x1", "x2", "u"), rng)
            try:
                va, vb = a.eval_at(pt), b.eval_at(pt)
            except EvaluationError:
                continue
            assert va != vb
            pairs += 1
            break
    assert pairs >= 15
