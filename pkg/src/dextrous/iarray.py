"""Vectorised interval arithmetic over numpy arrays, plus interval gradients.

:class:`IntervalArray` holds elementwise ``[lo, hi]`` bounds for a batch of
boxes.  Every operation is computed in round-to-nearest and both endpoints are
then stepped one ulp outward with :func:`numpy.nextafter`, which encloses the
exact result because IEEE ``+ - * / sqrt`` are correctly rounded.

:class:`GradInterval` is forward-mode differentiation on top of it: a value
enclosure together with enclosures of the partial derivatives over the same
box.  It feeds the mean-value form used by the certification code.

Kinematic expressions are written once against the small protocol shared by
floats, numpy arrays, :class:`IntervalArray` and :class:`GradInterval`
(``+ - *``, :func:`square`, :func:`sqrt`), so the point evaluation and both
enclosures come from the same source.
"""

from __future__ import annotations

import numpy as np

_NEG_INF = -np.inf
_POS_INF = np.inf


def _dn(a):
    return np.nextafter(a, _NEG_INF)


def _up(a):
    return np.nextafter(a, _POS_INF)


class IntervalArray:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = self.lo if hi is None else np.asarray(hi, dtype=float)

    @classmethod
    def exact(cls, values) -> "IntervalArray":
        """Degenerate intervals around values that are already exact floats."""
        v = np.asarray(values, dtype=float)
        return cls(v, v)

    def __len__(self):
        return len(self.lo)

    def __repr__(self):
        return f"IntervalArray(lo={self.lo!r}, hi={self.hi!r})"

    def __getitem__(self, idx):
        return IntervalArray(self.lo[idx], self.hi[idx])

    @property
    def width(self):
        return self.hi - self.lo

    def contains_zero(self):
        return (self.lo <= 0.0) & (self.hi >= 0.0)

    def __add__(self, other):
        if isinstance(other, IntervalArray):
            return IntervalArray(_dn(self.lo + other.lo), _up(self.hi + other.hi))
        return IntervalArray(_dn(self.lo + other), _up(self.hi + other))

    __radd__ = __add__

    def __neg__(self):
        return IntervalArray(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, IntervalArray):
            return IntervalArray(_dn(self.lo - other.hi), _up(self.hi - other.lo))
        return IntervalArray(_dn(self.lo - other), _up(self.hi - other))

    def __rsub__(self, other):
        return IntervalArray(_dn(other - self.hi), _up(other - self.lo))

    def __mul__(self, other):
        if isinstance(other, IntervalArray):
            p1 = self.lo * other.lo
            p2 = self.lo * other.hi
            p3 = self.hi * other.lo
            p4 = self.hi * other.hi
            lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
            hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
            return IntervalArray(_dn(lo), _up(hi))
        c = np.asarray(other, dtype=float)
        a = self.lo * c
        b = self.hi * c
        return IntervalArray(_dn(np.minimum(a, b)), _up(np.maximum(a, b)))

    __rmul__ = __mul__

    def square(self) -> "IntervalArray":
        a = self.lo * self.lo
        b = self.hi * self.hi
        straddles = (self.lo <= 0.0) & (self.hi >= 0.0)
        lo = np.where(straddles, 0.0, np.maximum(_dn(np.minimum(a, b)), 0.0))
        return IntervalArray(lo, _up(np.maximum(a, b)))

    def sqrt(self) -> "IntervalArray":
        # negative parts are clipped; callers check the domain beforehand
        lo = np.maximum(_dn(np.sqrt(np.maximum(self.lo, 0.0))), 0.0)
        hi = _up(np.sqrt(np.maximum(self.hi, 0.0)))
        return IntervalArray(lo, hi)

    def reciprocal(self) -> "IntervalArray":
        """``1/x`` for intervals with ``lo > 0``; yields ``inf`` bounds if ``lo == 0``."""
        with np.errstate(divide="ignore"):
            return IntervalArray(_dn(1.0 / self.hi), _up(1.0 / self.lo))

    def hull(self, other: "IntervalArray") -> "IntervalArray":
        return IntervalArray(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def intersect(self, other: "IntervalArray") -> "IntervalArray":
        """Elementwise intersection; the caller guarantees both are enclosures
        of the same quantity, so the result is never empty."""
        return IntervalArray(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))


class GradInterval:
    """Value enclosure plus enclosures of its partial derivatives."""

    __slots__ = ("val", "grad")

    def __init__(self, val: IntervalArray, grad: list):
        self.val = val
        self.grad = grad

    @classmethod
    def variables(cls, bounds: np.ndarray) -> list["GradInterval"]:
        """Independent variables for a batch of boxes shaped ``(n, d, 2)``."""
        n, d, _ = bounds.shape
        zero = IntervalArray.exact(np.zeros(n))
        one = IntervalArray.exact(np.ones(n))
        out = []
        for j in range(d):
            val = IntervalArray(bounds[:, j, 0], bounds[:, j, 1])
            out.append(cls(val, [one if i == j else zero for i in range(d)]))
        return out

    def __add__(self, other):
        if isinstance(other, GradInterval):
            return GradInterval(self.val + other.val, [a + b for a, b in zip(self.grad, other.grad)])
        return GradInterval(self.val + other, self.grad)

    __radd__ = __add__

    def __neg__(self):
        return GradInterval(-self.val, [-g for g in self.grad])

    def __sub__(self, other):
        if isinstance(other, GradInterval):
            return GradInterval(self.val - other.val, [a - b for a, b in zip(self.grad, other.grad)])
        return GradInterval(self.val - other, self.grad)

    def __rsub__(self, other):
        return GradInterval(other - self.val, [-g for g in self.grad])

    def __mul__(self, other):
        if isinstance(other, GradInterval):
            return GradInterval(
                self.val * other.val,
                [a * other.val + b * self.val for a, b in zip(self.grad, other.grad)],
            )
        return GradInterval(self.val * other, [g * other for g in self.grad])

    __rmul__ = __mul__

    def square(self) -> "GradInterval":
        twice = self.val * 2.0
        return GradInterval(self.val.square(), [g * twice for g in self.grad])

    def sqrt(self) -> "GradInterval":
        root = self.val.sqrt()
        k = (root * 2.0).reciprocal()
        return GradInterval(root, [g * k for g in self.grad])


def square(v):
    if isinstance(v, (IntervalArray, GradInterval)):
        return v.square()
    return v * v


def sqrt(v):
    if isinstance(v, (IntervalArray, GradInterval)):
        return v.sqrt()
    return np.sqrt(v)


def natural_vars(bounds: np.ndarray) -> list[IntervalArray]:
    """One :class:`IntervalArray` per coordinate of a ``(n, d, 2)`` batch."""
    return [IntervalArray(bounds[:, j, 0], bounds[:, j, 1]) for j in range(bounds.shape[1])]


def enclose(fn, bounds: np.ndarray, *args) -> IntervalArray:
    """Enclose ``fn(*coords, *args)`` over each box of a ``(n, d, 2)`` batch.

    The result is the intersection of the natural interval extension and the
    mean-value form ``f(m) + sum_j f_j(B) * (B_j - m_j)`` at the box midpoint.
    Where the gradient enclosure is not finite (a square root evaluated at
    zero) only the natural extension is used.
    """
    graded = fn(*GradInterval.variables(bounds), *args)
    # the value part of the gradient evaluation is the natural extension
    natural = graded.val
    mid = 0.5 * (bounds[..., 0] + bounds[..., 1])
    at_mid = fn(*[IntervalArray.exact(mid[:, j]) for j in range(mid.shape[1])], *args)
    mv = at_mid
    for j, g in enumerate(graded.grad):
        offset = IntervalArray(_dn(bounds[:, j, 0] - mid[:, j]), _up(bounds[:, j, 1] - mid[:, j]))
        mv = mv + g * offset
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(mv.lo) & np.isfinite(mv.hi)
    lo = np.where(ok, np.maximum(natural.lo, np.where(ok, mv.lo, 0.0)), natural.lo)
    hi = np.where(ok, np.minimum(natural.hi, np.where(ok, mv.hi, 0.0)), natural.hi)
    return IntervalArray(lo, hi)
