"""Truncated univariate Taylor arithmetic.

A :class:`Jet` of order ``K`` holds ``c_0, ..., c_K`` and stands for
``c_0 + c_1 t + ... + c_K t^K + o(t^K)``.  Coefficients can be floats, numpy
arrays (a batch of jets evaluated in lockstep) or jets themselves, which is
how mixed partial derivatives are obtained in :mod:`hocones.taylor`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import DomainError, Expr, evaluate

__all__ = [
    "Jet", "Arc", "eval_on_arc", "jet_add", "jet_mul", "jet_div", "jet_pow_int",
    "jet_sin", "jet_cos", "jet_exp", "constant", "variable",
]


def _fn(name, c):
    if isinstance(c, Jet):
        return getattr(c, name)()
    return getattr(np, name)(c)


def _zero_like(c):
    return c * 0


def _depth(c):
    d = 0
    while isinstance(c, Jet):
        c, d = c.coeffs[0], d + 1
    return d


class Jet:
    """Order-K truncated Taylor series in one variable."""

    __slots__ = ("coeffs",)
    __array_ufunc__ = None  # make numpy defer to the reflected jet operators

    def __init__(self, coeffs: Sequence):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a jet needs at least one coefficient")
        self.coeffs = coeffs

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __repr__(self):
        return f"Jet({list(self.coeffs)!r})"

    def _coerce(self, other):
        # a shallower jet is a coefficient of a nested jet, i.e. a scalar here
        if isinstance(other, Jet) and _depth(other) == _depth(self):
            if other.order != self.order:
                raise ValueError(f"jet orders differ: {self.order} vs {other.order}")
            return other
        zero = _zero_like(self.coeffs[0])
        return Jet((zero + other,) + tuple(_zero_like(c) for c in self.coeffs[1:]))

    # arithmetic

    def _shallower_than(self, other):
        return isinstance(other, Jet) and _depth(other) > _depth(self)

    def __add__(self, other):
        if self._shallower_than(other):
            return other + self
        if not isinstance(other, Jet):
            return Jet((self.coeffs[0] + other,) + self.coeffs[1:])
        other = self._coerce(other)
        return Jet(a + b for a, b in zip(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if self._shallower_than(other):
            return other * self
        if not isinstance(other, Jet):
            return Jet(c * other for c in self.coeffs)
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        return Jet(_conv(a, b, k) for k in range(len(a)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if self._shallower_than(other):
            return jet_div(other._coerce(self), other)
        if not isinstance(other, Jet):
            if _any_zero(other):
                raise DomainError("division by zero")
            return Jet(c / other for c in self.coeffs)
        return jet_div(self, other)

    def __rtruediv__(self, other):
        return jet_div(self._coerce(other), self)

    def __pow__(self, n):
        return jet_pow_int(self, n)

    def sin(self):
        return _sincos(self)[0]

    def cos(self):
        return _sincos(self)[1]

    def exp(self):
        return jet_exp(self)


def _conv(a, b, k):
    out = a[0] * b[k]
    for i in range(1, k + 1):
        out = out + a[i] * b[k - i]
    return out


def _any_zero(c):
    if isinstance(c, Jet):
        return _any_zero(c.coeffs[0])
    return bool(np.any(np.asarray(c) == 0))


def jet_add(a: Jet, b) -> Jet:
    return a + b


def jet_mul(a: Jet, b) -> Jet:
    return a * b


def jet_div(a: Jet, b: Jet) -> Jet:
    """Quotient series; ``b`` must have a nonzero constant term."""
    b = a._coerce(b)
    b0 = b.coeffs[0]
    if _any_zero(b0):
        raise DomainError("division by a jet with zero constant term")
    q = []
    for k in range(len(a.coeffs)):
        acc = a.coeffs[k]
        for i in range(1, k + 1):
            acc = acc - b.coeffs[i] * q[k - i]
        q.append(acc / b0)
    return Jet(q)


def jet_pow_int(a: Jet, n: int) -> Jet:
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError("exponent must be a non-negative integer")
    one = a.coeffs[0] * 0 + 1
    result = a._coerce(one)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def jet_exp(a: Jet) -> Jet:
    c = a.coeffs
    e = [_fn("exp", c[0])]
    for k in range(1, len(c)):
        acc = c[1] * e[k - 1]
        for i in range(2, k + 1):
            acc = acc + i * c[i] * e[k - i]
        e.append(acc / k)
    return Jet(e)


def _sincos(a: Jet):
    c = a.coeffs
    s = [_fn("sin", c[0])]
    co = [_fn("cos", c[0])]
    for k in range(1, len(c)):
        acc_s = c[1] * co[k - 1]
        acc_c = c[1] * s[k - 1]
        for i in range(2, k + 1):
            acc_s = acc_s + i * c[i] * co[k - i]
            acc_c = acc_c + i * c[i] * s[k - i]
        s.append(acc_s / k)
        co.append(-acc_c / k)
    return Jet(s), Jet(co)


def jet_sin(a: Jet) -> Jet:
    return _sincos(a)[0]


def jet_cos(a: Jet) -> Jet:
    return _sincos(a)[1]


def constant(value, order: int) -> Jet:
    return Jet((value,) + tuple(_zero_like(value) for _ in range(order)))


def variable(value, order: int, slope=1.0) -> Jet:
    """Jet of ``value + slope * t``."""
    if order == 0:
        return Jet((value,))
    zero = _zero_like(value)
    return Jet((value, zero + slope) + tuple(zero for _ in range(order - 1)))


@dataclass(frozen=True)
class Arc:
    """Polynomial curve ``base + sum_i t^i h_i + scale * t^degree * w``.

    ``tail`` is ``None`` or a triple ``(w, degree, scale)``.
    """

    base: tuple
    directions: tuple = ()
    tail: tuple | None = None

    def __init__(self, base, directions=(), tail=None):
        base = tuple(float(v) for v in base)
        dirs = tuple(tuple(float(v) for v in h) for h in directions)
        n = len(base)
        if any(len(h) != n for h in dirs):
            raise ValueError("all directions must match the base point dimension")
        if tail is not None:
            w, degree, scale = tail
            w = tuple(float(v) for v in w)
            if len(w) != n:
                raise ValueError("tail vector dimension mismatch")
            if scale <= 0:
                raise ValueError("tail scale must be positive")
            tail = (w, int(degree), float(scale))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "tail", tail)

    @property
    def dim(self) -> int:
        return len(self.base)

    @property
    def order(self) -> int:
        """The order k, i.e. one more than the number of directions."""
        return len(self.directions) + 1

    @property
    def degree(self) -> int:
        deg = len(self.directions)
        if self.tail is not None:
            deg = max(deg, self.tail[1])
        return deg

    def coordinate_coeffs(self, K: int) -> np.ndarray:
        """``(n, K+1)`` array of Taylor coefficients of each coordinate."""
        c = np.zeros((self.dim, K + 1))
        c[:, 0] = self.base
        for i, h in enumerate(self.directions, start=1):
            if i <= K:
                c[:, i] += h
        if self.tail is not None:
            w, degree, scale = self.tail
            if degree <= K:
                c[:, degree] += scale * np.asarray(w)
        return c

    def point(self, t):
        c = self.coordinate_coeffs(self.degree)
        powers = np.asarray(t, dtype=float)[..., None] ** np.arange(c.shape[1])
        return powers @ c.T


def eval_on_arc(f: Expr, arc: Arc, K: int | None = None) -> Jet:
    """Order-K jet of ``t -> f(arc(t))``.

    K defaults to the arc's order k; it must cover the arc's highest term.
    """
    if arc.dim != f.arity:
        raise ValueError("arc dimension does not match the expression arity")
    if K is None:
        K = arc.order
    if K < arc.degree:
        raise ValueError(f"jet order {K} below arc degree {arc.degree}")
    coeffs = arc.coordinate_coeffs(K)
    xs = [Jet(tuple(float(v) for v in row)) for row in coeffs]
    out = evaluate(f, xs)
    if not isinstance(out, Jet):
        out = constant(float(out), K)
    return Jet(tuple(float(c) for c in out.coeffs))
