"""Truncated Taylor series ("jets") evaluated on arrays of points.

A jet of order K at points x holds the normalized Taylor coefficients
c[k] = f^(k)(x) / k! for k = 0..K, stored as an array of shape (K+1, N).
Arithmetic on jets propagates exact derivatives through sums, products,
quotients, exponentials and real powers, which is how every built-in
function family obtains its derivatives without finite differencing.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs)

    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = np.zeros((order + 1, x.size), dtype=float)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, npts: int) -> "Jet":
        value = np.broadcast_to(np.asarray(value), (npts,))
        c = np.zeros((order + 1, npts), dtype=np.result_type(value, float))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Convert normalized coefficients back to plain derivatives."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        other = np.asarray(other)
        c = np.zeros_like(self.c, dtype=np.result_type(self.c, other))
        c[0] = other
        return Jet(c)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.c - other.c)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            if other.ndim <= 1:
                return Jet(self.c * other)
            other = self._coerce(other)
        a, b = self.c, other.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(out.shape[0]):
            # Cauchy product of the two coefficient sequences
            out[k] = np.einsum("j...,j...->...", a[: k + 1], b[k::-1])
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a, dtype=np.result_type(a, float))
        inv0 = 1.0 / a[0]
        out[0] = inv0
        for k in range(1, a.shape[0]):
            out[k] = -inv0 * np.einsum("j...,j...->...", a[1 : k + 1], out[k - 1 :: -1])
        return Jet(out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            if other.ndim <= 1:
                return Jet(self.c / other)
            other = self._coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def exp(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a, dtype=np.result_type(a, float))
        out[0] = np.exp(a[0])
        j = np.arange(1, a.shape[0], dtype=float).reshape((-1,) + (1,) * (a.ndim - 1))
        ja = j * a[1:]
        for k in range(1, a.shape[0]):
            out[k] = np.einsum("j...,j...->...", ja[:k], out[k - 1 :: -1]) / k
        return Jet(out)

    def power(self, beta: float) -> "Jet":
        """Real power a**beta; requires a[0] != 0 at every point."""
        a = self.c
        out = np.zeros_like(a, dtype=np.result_type(a, float))
        out[0] = np.power(a[0], beta)
        for k in range(1, a.shape[0]):
            j = np.arange(1, k + 1, dtype=float).reshape((-1,) + (1,) * (a.ndim - 1))
            w = (beta + 1.0) * j - k
            out[k] = np.einsum("j...,j...->...", w * a[1 : k + 1], out[k - 1 :: -1]) / (k * a[0])
        return Jet(out)

    def where(self, mask, other: "Jet") -> "Jet":
        """Pointwise selection: self where mask else other."""
        other = self._coerce(other)
        return Jet(np.where(mask, self.c, other.c))


def polynomial(coeffs, x, order: int) -> Jet:
    """Jet of sum_k coeffs[k] x**k by Horner's rule on jets."""
    t = Jet.variable(x, order)
    acc = Jet.constant(0.0, order, t.c.shape[1])
    for a in reversed(list(coeffs)):
        acc = acc * t + a
    return acc
