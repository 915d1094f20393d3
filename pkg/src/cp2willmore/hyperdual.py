"""Hyper-dual numbers for exact second derivatives.

A hyper-dual number ``a + b e1 + c e2 + d e1e2`` with ``e1**2 = e2**2 = 0``
carries a value, two first-order parts and one mixed second-order part.
Seeding ``x = HyperDual(x0, 1, 1, 0)`` yields ``f_xx`` in the mixed slot of
``f(x)``; seeding two variables along different units yields ``f_xy``.

Components are numpy arrays (complex allowed), so one evaluation
differentiates a whole grid of points at once.  Family formulas written with
``np.exp``, ``np.conj`` and friends work unchanged through ``__array_ufunc__``.
"""

from __future__ import annotations

import numpy as np


class HyperDual:
    __slots__ = ("f0", "f1", "f2", "f12")
    __array_priority__ = 1000

    def __init__(self, f0, f1=0.0, f2=0.0, f12=0.0):
        self.f0 = np.asarray(f0)
        self.f1 = np.asarray(f1)
        self.f2 = np.asarray(f2)
        self.f12 = np.asarray(f12)

    def __repr__(self):
        return f"HyperDual({self.f0!r}, {self.f1!r}, {self.f2!r}, {self.f12!r})"

    @staticmethod
    def lift(x) -> "HyperDual":
        return x if isinstance(x, HyperDual) else HyperDual(x)

    def _chain(self, g, dg, ddg) -> "HyperDual":
        # f(a) for a scalar function with derivatives dg, ddg evaluated at f0
        return HyperDual(
            g,
            dg * self.f1,
            dg * self.f2,
            dg * self.f12 + ddg * self.f1 * self.f2,
        )

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        o = HyperDual.lift(other)
        return HyperDual(self.f0 + o.f0, self.f1 + o.f1, self.f2 + o.f2, self.f12 + o.f12)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.f0, -self.f1, -self.f2, -self.f12)

    def __sub__(self, other):
        return self + (-HyperDual.lift(other))

    def __rsub__(self, other):
        return HyperDual.lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, HyperDual):
            o = np.asarray(other)
            return HyperDual(self.f0 * o, self.f1 * o, self.f2 * o, self.f12 * o)
        return HyperDual(
            self.f0 * other.f0,
            self.f0 * other.f1 + self.f1 * other.f0,
            self.f0 * other.f2 + self.f2 * other.f0,
            self.f0 * other.f12 + self.f1 * other.f2 + self.f2 * other.f1 + self.f12 * other.f0,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "HyperDual":
        inv = 1.0 / self.f0
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, HyperDual):
            return self * (1.0 / np.asarray(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if n == 2:
            return self * self
        g = self.f0 ** n
        return self._chain(g, n * self.f0 ** (n - 1), n * (n - 1) * self.f0 ** (n - 2))

    # elementary functions ------------------------------------------------
    def conjugate(self):
        return HyperDual(np.conj(self.f0), np.conj(self.f1), np.conj(self.f2), np.conj(self.f12))

    conj = conjugate

    def exp(self):
        e = np.exp(self.f0)
        return self._chain(e, e, e)

    def sin(self):
        s, c = np.sin(self.f0), np.cos(self.f0)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.f0), np.cos(self.f0)
        return self._chain(c, -s, -c)

    def sqrt(self):
        r = np.sqrt(self.f0)
        return self._chain(r, 0.5 / r, -0.25 / (r * self.f0))

    def tan(self):
        t = np.tan(self.f0)
        sec2 = 1.0 + t * t
        return self._chain(t, sec2, 2.0 * t * sec2)

    @property
    def real(self):
        return HyperDual(np.real(self.f0), np.real(self.f1), np.real(self.f2), np.real(self.f12))

    @property
    def imag(self):
        return HyperDual(np.imag(self.f0), np.imag(self.f1), np.imag(self.f2), np.imag(self.f12))

    _UFUNCS = {
        np.add: lambda a, b: HyperDual.lift(a) + b,
        np.subtract: lambda a, b: HyperDual.lift(a) - b,
        np.multiply: lambda a, b: HyperDual.lift(a) * b,
        np.true_divide: lambda a, b: HyperDual.lift(a) / b,
        np.negative: lambda a: -a,
        np.positive: lambda a: a,
        np.conjugate: lambda a: a.conjugate(),
        np.exp: lambda a: a.exp(),
        np.sin: lambda a: a.sin(),
        np.cos: lambda a: a.cos(),
        np.tan: lambda a: a.tan(),
        np.sqrt: lambda a: a.sqrt(),
        np.square: lambda a: a * a,
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        impl = self._UFUNCS.get(ufunc)
        if impl is None:
            return NotImplemented
        return impl(*inputs)


def seed(x0, y0, direction: str):
    """Seed hyper-dual coordinates for one second-derivative pass.

    ``direction`` is ``"xx"``, ``"xy"`` or ``"yy"``; the mixed slot of the
    result then holds that second partial, and for ``"xy"`` the first-order
    slots hold ``f_x`` and ``f_y``.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    zero = np.zeros_like(x0)
    one = np.ones_like(x0)
    if direction == "xx":
        return HyperDual(x0, one, one, zero), HyperDual(y0, zero, zero, zero)
    if direction == "xy":
        return HyperDual(x0, one, zero, zero), HyperDual(y0, zero, one, zero)
    if direction == "yy":
        return HyperDual(x0, zero, zero, zero), HyperDual(y0, one, one, zero)
    raise ValueError(f"unknown seed direction {direction!r}")
