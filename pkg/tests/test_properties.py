"""Randomized algebraic laws."""

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dtflat import (
    Chart,
    CovectorField,
    Distribution,
    VectorField,
    adjusted_basis,
    annihilator,
    lie_bracket,
    parse,
)
from dtflat.elimination import factor_through
from dtflat.errors import EvaluationError
from dtflat.geometry import contract

from _util import rand_point, rand_poly_text

C = Chart(["x1", "x2", "x3"])
NAMES = list(C.names)
SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(min_value=0, max_value=10**6)


def _poly(rng, names=NAMES, terms=3):
    return parse(rand_poly_text(rng, names, terms=terms))


def _field(rng):
    return VectorField(C, [_poly(rng) for _ in NAMES])


@SETTINGS
@given(seeds)
def test_bracket_antisymmetry_and_jacobi(seed):
    rng = random.Random(seed)
    a, b, c = _field(rng), _field(rng), _field(rng)
    assert (lie_bracket(a, b) + lie_bracket(b, a)).is_zero()
    jac = lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a)) + lie_bracket(c, lie_bracket(a, b))
    assert jac.is_zero()


@SETTINGS
@given(seeds)
def test_bracket_leibniz(seed):
    rng = random.Random(seed)
    a, b = _field(rng), _field(rng)
    f = _poly(rng)
    assert lie_bracket(a, b.scale(f)) == lie_bracket(a, b).scale(f) + b.scale(a.apply(f))


@SETTINGS
@given(seeds)
def test_annihilator_law(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 2)
    D = Distribution(C, [_field(rng) for _ in range(k)])
    ws = annihilator(D)
    assert len(ws) == C.dim - D.rank
    for w in ws:
        assert isinstance(w, CovectorField)
        for v in D.generators:
            assert contract(v, w).is_zero()


def _fd_check(e, var, pt, h=1e-6):
    d = e.diff(var)
    lo, hi = dict(pt), dict(pt)
    lo[var] -= h
    hi[var] += h
    approx = (e.eval_at(hi) - e.eval_at(lo)) / (2 * h)
    exact = d.eval_at(pt)
    return abs(approx - exact) <= 1e-6 * max(1.0, abs(exact))


def test_diff_matches_central_difference():
    rng = random.Random(9)
    checked = 0
    for _ in range(20):
        e = _poly(rng) / (_poly(rng, terms=2) + parse("100"))
        for _ in range(10):
            pt = {k: float(v) for k, v in rand_point(NAMES, rng, bound=3).items()}
            try:
                assert _fd_check(e, rng.choice(NAMES), pt)
            except EvaluationError:
                continue
            checked += 1
    assert checked >= 150


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_factor_through_round_trip(seed):
    rng = random.Random(seed)
    g = [_poly(rng, ["x1", "x2", "x3"], terms=2), _poly(rng, ["x1", "x2", "x3"], terms=2)]
    G = parse(rand_poly_text(rng, ["z1", "z2"], terms=2, deg=2))
    c = G.subs({"z1": g[0], "z2": g[1]})
    H = factor_through(c, g, ["z1", "z2"])
    assert H is not None
    assert H.subs({"z1": g[0], "z2": g[1]}) == c


def test_adjusted_basis_commuting_recombined():
    C4 = Chart(["x1", "x2", "x3", "x4"])
    rng = random.Random(21)
    for _ in range(10):
        p = parse(rand_poly_text(rng, ["x3"], terms=2))
        q = parse(rand_poly_text(rng, ["x3"], terms=2))
        v1 = VectorField.from_dict(C4, {"x1": parse("1"), "x2": p})
        v2 = VectorField.from_dict(C4, {"x4": parse("1"), "x2": q})
        assert lie_bracket(v1, v2).is_zero()
        a, b = _poly(rng, list(C4.names), 2), _poly(rng, list(C4.names), 2)
        # recombination [[1, a], [b, a*b + 2]] has determinant 2
        D = Distribution(C4, [v1 + v2.scale(a), v1.scale(b) + v2.scale(a * b + parse("2"))])
        basis = adjusted_basis(D)
        assert len(basis) == 2
        assert Distribution(C4, basis).span_equals(D)
        assert lie_bracket(basis[0], basis[1]).is_zero()
