"""Truncated Taylor (jet) arithmetic over the complex numbers.

A jet of order K at a center x0 stores coefficients (c_0, ..., c_K) of
f(x) = sum c_j (x - x0)^j + O((x - x0)^(K+1)).  Products truncate the
Cauchy convolution; quotients run the standard power-series long
division.  The j-th derivative at the center is j! * c_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZeroGerm


@dataclass(frozen=True)
class Jet:
    """Taylor coefficients about a fixed (implicit) center."""

    coeffs: np.ndarray  # complex, length order + 1

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           np.asarray(self.coeffs, dtype=complex))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def __add__(self, other):
        a, b = _match(self, other)
        return Jet(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = _match(self, other)
        return Jet(a - b)

    def __rsub__(self, other):
        a, b = _match(self, other)
        return Jet(b - a)

    def __neg__(self):
        return Jet(-self.coeffs)

    def __mul__(self, other):
        a, b = _match(self, other)
        return Jet(np.convolve(a, b)[: len(a)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = _match(self, other)
        return Jet(_series_div(a, b))

    def __rtruediv__(self, other):
        a, b = _match(self, other)
        return Jet(_series_div(b, a))


def _match(x, y):
    """Coefficient arrays of x and y at the larger of the two orders."""
    xc = x.coeffs if isinstance(x, Jet) else np.array([complex(x)])
    yc = y.coeffs if isinstance(y, Jet) else np.array([complex(y)])
    n = max(len(xc), len(yc))
    a = np.zeros(n, dtype=complex)
    b = np.zeros(n, dtype=complex)
    a[: len(xc)] = xc
    b[: len(yc)] = yc
    return a, b


def _series_div(num, den):
    if den[0] == 0:
        raise DivisionByZeroGerm("quotient jet has a vanishing constant term")
    n = len(num)
    out = np.zeros(n, dtype=complex)
    for j in range(n):
        acc = num[j]
        for i in range(j):
            acc -= out[i] * den[j - i]
        out[j] = acc / den[0]
    return out


def jet_const(c, order: int) -> Jet:
    """The constant function c as an order-``order`` jet."""
    coeffs = np.zeros(order + 1, dtype=complex)
    coeffs[0] = complex(c)
    return Jet(coeffs)


def jet_from_linear(a, center, order: int) -> Jet:
    """The function x - a expanded about ``center``."""
    coeffs = np.zeros(order + 1, dtype=complex)
    coeffs[0] = complex(center) - complex(a)
    if order >= 1:
        coeffs[1] = 1.0
    return Jet(coeffs)


def jet_pow_int(x: Jet, p: int) -> Jet:
    """Integer power of a jet (negative p inverts first)."""
    if p < 0:
        x = jet_const(1.0, x.order) / x
        p = -p
    result = jet_const(1.0, x.order)
    base = x
    while p:
        if p & 1:
            result = result * base
        base = base * base
        p >>= 1
    return result


def jet_deriv(x: Jet, k: int) -> complex:
    """k-th derivative at the center: k! * c_k (0 beyond the order)."""
    if k > x.order:
        return 0j
    return complex(x.coeffs[k]) * math.factorial(k)
