import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import directional, random_polynomial_text, sympy_form
from hocones.expr import parse
from hocones.taylor import (MAX_ORDER, brute_force_multiindices, derivative_tensor, enumerate_multiindices,
                            gradient, sum_order_k, sum_order_s)

ORIGIN = np.zeros(2)


@pytest.mark.parametrize("s, count", [(1, 1), (2, 2), (3, 3), (4, 5), (5, 7), (6, 11), (7, 15), (8, 22)])
def test_partition_counts(s, count):
    got = enumerate_multiindices(s)
    assert len(got) == count
    assert got == brute_force_multiindices(s)
    assert got == sorted(got)
    assert all(sum(i * a for i, a in enumerate(alpha, 1)) == s for alpha in got)


def test_small_cases():
    assert enumerate_multiindices(1) == [(1,)]
    assert enumerate_multiindices(3) == [(0, 0, 1), (1, 1, 0), (3, 0, 0)]
    # restricted length: k = 3 with two directions drops alpha_3
    assert enumerate_multiindices(3, 2) == [(1, 1), (3, 0)]
    assert enumerate_multiindices(3, 2) == brute_force_multiindices(3, 2)


def test_order_limits():
    with pytest.raises(ValueError):
        enumerate_multiindices(0)
    with pytest.raises(ValueError):
        enumerate_multiindices(MAX_ORDER + 1)
    assert len(enumerate_multiindices(MAX_ORDER)) == 77


def test_derivative_tensor_examples():
    assert derivative_tensor(parse("x1^2", 2), ORIGIN, [((1, 0), 2)]) == 2
    f = parse("-x1 + x2^3", 2)
    assert derivative_tensor(f, ORIGIN, [((0, 1), 2)]) == 0
    assert derivative_tensor(f, ORIGIN, [((1, 0), 1)]) == -1
    assert derivative_tensor(f, ORIGIN, []) == 0
    assert np.array_equal(gradient(f, ORIGIN), [-1, 0])


def test_sum_examples():
    f = parse("-x1 + x2^3", 2)
    assert sum_order_s(f, ORIGIN, [(0, 1)], 1) == 0
    assert sum_order_s(parse("x1^2", 2), ORIGIN, [(1, 0)], 1) == 0
    assert sum_order_s(parse("x2", 2), ORIGIN, [(0, 1), (1, 0)], 2) == 0
    assert sum_order_k(f, ORIGIN, [(0, 1)], (1, 0)) == -1
    assert sum_order_k(parse("x1^2 + x2^2", 2), ORIGIN, [(1, 0)], (0, 0)) == 1
    assert sum_order_k(parse("3.5", 2), ORIGIN, [(1, 2), (3, 4)], (5, 6)) == 0


def test_argument_checks():
    f = parse("x1", 2)
    with pytest.raises(ValueError):
        sum_order_s(f, ORIGIN, [(1, 0)], 2)
    with pytest.raises(ValueError):
        sum_order_k(f, ORIGIN, [], (1, 0))
    with pytest.raises(ValueError):
        derivative_tensor(f, np.zeros(3), [((1, 0), 1)])


def test_tensors_match_symbolic_derivatives():
    rng = np.random.default_rng(21)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        text = random_polynomial_text(rng, n, 4) + f" + exp(x1) * cos(x{n})"
        f = parse(text, n)
        sf, xs = sympy_form(text, n)
        base = rng.normal(size=n)
        vecs = rng.normal(size=(int(rng.integers(1, 5)), n))
        ref = directional(sf, xs, list(vecs), base)
        got = derivative_tensor(f, base, [(v, 1) for v in vecs])
        assert abs(got - ref) <= 1e-9 * (1 + abs(ref))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_permutation_symmetry(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    f = parse(random_polynomial_text(rng, n, 4), n)
    base = rng.normal(size=n)
    vecs = rng.normal(size=(3, n))
    mults = [int(m) for m in rng.integers(1, 3, size=3)]
    args = list(zip(vecs, mults))
    values = [derivative_tensor(f, base, list(p)) for p in itertools.permutations(args)]
    # repeated arguments may also be spelled out one by one
    expanded = [(v, 1) for v, m in args for _ in range(m)]
    values.append(derivative_tensor(f, base, expanded))
    scale = 1 + max(abs(v) for v in values)
    assert max(values) - min(values) <= 1e-9 * scale
