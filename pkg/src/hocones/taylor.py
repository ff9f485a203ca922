"""Multi-index sums of symmetric derivative tensors.

This module evaluates the Taylor coefficients of ``f`` along a polynomial
arc the long way round: enumerate the weighted multi-indices, evaluate each
tensor term ``f^(m)(x)[h_1]^a_1 ... [h_s]^a_s`` separately and add them up.
It serves as the independent check on :func:`hocones.jets.eval_on_arc`.
"""
from __future__ import annotations

import itertools
from math import factorial, prod

import numpy as np

from .expr import Expr, evaluate
from .jets import Jet

MAX_ORDER = 12


def _check_order(s):
    if s > MAX_ORDER:
        raise ValueError(f"order {s} exceeds the supported maximum {MAX_ORDER}")


def enumerate_multiindices(s: int, length: int | None = None) -> list[tuple[int, ...]]:
    """All ``(a_1, ..., a_L)`` with ``a_i >= 0`` and ``sum i * a_i == s``.

    ``length`` defaults to ``s``.  Results are in ascending lexicographic
    order; for ``length == s`` their number is the partition number p(s).
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    _check_order(s)
    L = s if length is None else length
    if L < 1:
        raise ValueError("length must be at least 1")
    out = []

    def rec(i, remaining, prefix):
        # i is the 1-based position being filled
        if i > L:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for a in range(remaining // i + 1):
            prefix.append(a)
            rec(i + 1, remaining - i * a, prefix)
            prefix.pop()

    rec(1, s, [])
    return out


def brute_force_multiindices(s: int, length: int | None = None) -> list[tuple[int, ...]]:
    """Reference enumeration: filter the whole box ``0 <= a_i <= s // i``."""
    L = s if length is None else length
    ranges = [range(s // i + 1) for i in range(1, L + 1)]
    return sorted(a for a in itertools.product(*ranges)
                  if sum(i * ai for i, ai in enumerate(a, start=1)) == s)


def _nested(b, slopes, orders):
    # jet for b + sum_j slopes[j] * u_j, with u_1 outermost
    if not orders:
        return float(b)
    inner_const = _nested(b, slopes[1:], orders[1:])
    zero = _nested(0.0, [0.0] * (len(slopes) - 1), orders[1:])
    slope = _nested(float(slopes[0]), [0.0] * (len(slopes) - 1), orders[1:])
    return Jet((inner_const, slope) + (zero,) * (orders[0] - 1))


def _coefficient(value, index):
    for i in index:
        if not isinstance(value, Jet):
            return 0.0 if i else value
        value = value.coeffs[i]
    while isinstance(value, Jet):
        value = value.coeffs[0]
    return float(value)


def derivative_tensor(f: Expr, base, arguments) -> float:
    """``f^(m)(base)[v_1]^a_1 ... [v_mu]^a_mu`` for ``arguments = [(v_j, a_j)]``.

    Obtained as the mixed coefficient of ``u -> f(base + sum u_j v_j)`` via
    nested univariate jets, times ``a_1! ... a_mu!``.
    """
    args = [(np.asarray(v, dtype=float), int(a)) for v, a in arguments if int(a) > 0]
    if any(a < 0 for _, a in arguments):
        raise ValueError("multiplicities must be non-negative")
    base = np.asarray(base, dtype=float)
    if base.shape != (f.arity,):
        raise ValueError("base point dimension mismatch")
    if not args:
        return float(evaluate(f, list(base)))
    _check_order(sum(a for _, a in args))
    vectors = [v for v, _ in args]
    orders = [a for _, a in args]
    coords = [_nested(base[c], [v[c] for v in vectors], orders) for c in range(f.arity)]
    value = evaluate(f, coords)
    return _coefficient(value, orders) * prod(factorial(a) for a in orders)


def _weighted_sum(f, base, H, alphas):
    total = 0.0
    for alpha in alphas:
        weight = prod(factorial(a) for a in alpha)
        term = derivative_tensor(f, base, [(H[i], a) for i, a in enumerate(alpha)])
        total += term / weight
    return total


def sum_order_s(f: Expr, base, H, s: int) -> float:
    """Coefficient of ``t^s`` in ``f(base + t h_1 + ... )`` assembled term by term."""
    H = [np.asarray(h, dtype=float) for h in H]
    if not 1 <= s <= len(H):
        raise ValueError("need 1 <= s <= number of directions")
    return _weighted_sum(f, base, H, enumerate_multiindices(s))


def sum_order_k(f: Expr, base, H, w) -> float:
    """``f'(base) w`` plus the weighted tensor sum with ``sum i * a_i == k``.

    Here ``k = len(H) + 1``; this is the t^k coefficient when the arc carries
    the extra term ``t^k w``.
    """
    H = [np.asarray(h, dtype=float) for h in H]
    if len(H) < 1:
        raise ValueError("need at least one direction")
    k = len(H) + 1
    grad_term = derivative_tensor(f, base, [(w, 1)])
    return grad_term + _weighted_sum(f, base, H, enumerate_multiindices(k, len(H)))


def gradient(f: Expr, base) -> np.ndarray:
    """Gradient of ``f`` at ``base`` (one first-order jet pass per coordinate)."""
    base = np.asarray(base, dtype=float)
    eye = np.eye(len(base))
    return np.array([derivative_tensor(f, base, [(e, 1)]) for e in eye])
