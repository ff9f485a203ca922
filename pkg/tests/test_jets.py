from math import factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import arc_function, central_derivative, random_polynomial_text
from hocones.expr import DomainError, parse
from hocones.jets import (Arc, Jet, constant, eval_on_arc, jet_cos, jet_div, jet_exp, jet_mul,
                          jet_pow_int, jet_sin, variable)
from hocones.taylor import sum_order_s


def coeffs(j):
    return [float(c) for c in j.coeffs]


def test_small_products():
    assert coeffs(jet_mul(Jet((1, 1, 0)), Jet((1, 1, 0)))) == [1, 2, 1]
    assert coeffs(jet_pow_int(Jet((0, 1, 0, 0)), 3)) == [0, 0, 0, 1]
    assert coeffs(jet_exp(Jet((0.0, 1.0)))) == [1, 1]


def test_order_is_preserved():
    a, b = variable(0.3, 5), constant(2.0, 5)
    for out in (a + b, a * b, a / b, a ** 3, jet_sin(a), jet_cos(a), jet_exp(a), a - 1, 2 / (a + 1)):
        assert len(out.coeffs) == 6


def test_mismatched_orders_raise():
    with pytest.raises(ValueError):
        Jet((1.0, 2.0)) + Jet((1.0, 2.0, 3.0))


def test_division_needs_nonzero_constant_term():
    with pytest.raises(DomainError):
        jet_div(Jet((1.0, 1.0)), Jet((0.0, 1.0)))
    with pytest.raises(ValueError):
        jet_pow_int(Jet((1.0, 1.0)), -1)


@pytest.mark.parametrize("name", ["sin", "cos", "exp", "recip"])
def test_elementary_series_match_mpmath(name):
    # compose with a non-trivial inner series u(t) = 0.4 + 0.7 t - 0.2 t^2 + 0.1 t^3
    K = 7
    inner = [0.4, 0.7, -0.2, 0.1] + [0.0] * (K - 3)
    u = Jet(inner)
    ops = {"sin": (jet_sin, mpmath.sin), "cos": (jet_cos, mpmath.cos),
           "exp": (jet_exp, mpmath.exp), "recip": (lambda j: 1.0 / j, lambda x: 1 / x)}
    jet_fn, mp_fn = ops[name]
    with mpmath.workdps(40):
        ref = mpmath.taylor(lambda t: mp_fn(sum(c * t ** i for i, c in enumerate(inner))), 0, K)
    got = jet_fn(u).coeffs
    for a, b in zip(got, ref):
        assert abs(a - float(b)) <= 1e-14 * (1 + abs(float(b)))


def test_array_coefficients_broadcast():
    s = np.linspace(-1, 1, 5)
    j = Jet((s, np.ones_like(s), np.zeros_like(s))) ** 3
    assert np.allclose(j.coeffs[0], s ** 3)
    assert np.allclose(j.coeffs[1], 3 * s ** 2)
    assert np.allclose(j.coeffs[2], 3 * s)


def test_nested_jets_mix_levels():
    inner = Jet((1.0, 2.0))
    outer = Jet((Jet((1.0, 1.0)), Jet((0.0, 1.0)), Jet((0.0, 0.0))))
    for a, b in ((inner + outer, outer + inner), (inner * outer, outer * inner)):
        assert [coeffs(c) for c in a.coeffs] == [coeffs(c) for c in b.coeffs]
    q = 1 / outer
    # 1/(1 + u + u t) = (1 - u) - u t + O(u^2, t^2)
    assert [coeffs(c) for c in q.coeffs] == [[1.0, -1.0], [0.0, -1.0], [0.0, 0.0]]


def test_arc_expansion_examples():
    f = parse("x1^2", 2)
    assert coeffs(eval_on_arc(f, Arc((0, 0), [(1, 0)]), 2)) == [0, 0, 1]
    g = parse("-x1 + x2^3", 2)
    # f(t^2, t) = -t^2 + t^3
    assert coeffs(eval_on_arc(g, Arc((0, 0), [(0, 1)], ((1, 0), 2, 1.0)), 3)) == [0, 0, -1, 1]
    assert coeffs(eval_on_arc(g, Arc((0, 0), [(0, 1)]), 1)) == [0, 0]


def test_jet_order_must_cover_arc():
    with pytest.raises(ValueError):
        eval_on_arc(parse("x1", 1), Arc((0,), [(1,)], ((1,), 3, 1.0)), 2)
    with pytest.raises(ValueError):
        eval_on_arc(parse("x1", 1), Arc((0, 0), [(1, 0)]))


def test_arc_point_matches_coefficients():
    arc = Arc((1.0, -1.0), [(0.5, 2.0), (1.0, 0.0)], ((3.0, 1.0), 2, 0.25))
    t = 0.3
    expected = np.array([1.0, -1.0]) + t * np.array([0.5, 2.0]) + t ** 2 * np.array([1.0, 0.0]) \
        + 0.25 * t ** 2 * np.array([3.0, 1.0])
    assert np.allclose(arc.point(t), expected, rtol=0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    tf, tg = random_polynomial_text(rng, n, 4), random_polynomial_text(rng, n, 4)
    arc = Arc(rng.normal(size=n), rng.normal(size=(2, n)), (rng.normal(size=n), 3, 1.0))
    sum_jet = eval_on_arc(parse(f"{tf} + {tg}", n), arc)
    parts = [eval_on_arc(parse(t, n), arc) for t in (tf, tg)]
    for c, a, b in zip(sum_jet.coeffs, parts[0].coeffs, parts[1].coeffs):
        assert abs(c - (a + b)) <= 1e-12 * (1 + abs(a) + abs(b))


def test_jets_match_partition_sums_for_every_lower_order():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        f = parse(random_polynomial_text(rng, n, 4), n)
        k = int(rng.integers(2, 5))
        base, H = rng.normal(size=n), rng.normal(size=(k - 1, n))
        jet = eval_on_arc(f, Arc(base, H), k - 1)
        for s in range(1, k):
            value = sum_order_s(f, base, H, s)
            assert abs(jet.coeffs[s] - value) <= 1e-9 * (1 + abs(value))


def test_nonpolynomial_coefficients_match_central_differences():
    rng = np.random.default_rng(12)
    extras = ["sin(x1)", "exp(x1/2)", "cos(x1 - x{n})", "1/(3 + x{n}^2)"]
    with mpmath.workdps(50):
        for i in range(40):
            n = int(rng.integers(1, 4))
            text = random_polynomial_text(rng, n, 3, terms=3) + " + " + extras[i % 4].format(n=n)
            f = parse(text, n)
            s = int(rng.integers(1, 5))
            base, H = rng.normal(size=n), rng.normal(size=(s, n))
            coeff = eval_on_arc(f, Arc(base, H), s).coeffs[s]
            est = float(central_derivative(arc_function(f, base, H), s, mpmath.mpf("1e-3")) / factorial(s))
            assert abs(est - coeff) <= 1e-4 * max(abs(coeff), 1e-6), (text, s)
