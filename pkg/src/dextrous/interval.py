"""Scalar interval arithmetic and axis-aligned boxes.

Rounding: every endpoint is the nearest float on the safe side of the exact
result.  The operation is carried out in round-to-nearest, the exact result is
compared against it with :class:`fractions.Fraction`, and the endpoint is moved
one ulp outward only when the float overshoots on the wrong side.  Results that
are exactly representable therefore come back unchanged
(``[1, 2] * [-1, 3] == [-2, 6]``).

The hot paths in :mod:`dextrous.iarray` use the cheaper rule of always stepping
one ulp outward; both are sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateAxis, DivisionByZeroInterval, EmptyDomain, EmptyIntervalError

_INF = math.inf


def _down(value: float, exact: Fraction) -> float:
    """Largest float <= exact, given the round-to-nearest ``value`` of it."""
    if math.isinf(value):
        return value if value < 0 else math.nextafter(value, -_INF)
    if Fraction(value) > exact:
        return math.nextafter(value, -_INF)
    return value


def _up(value: float, exact: Fraction) -> float:
    if math.isinf(value):
        return value if value > 0 else math.nextafter(value, _INF)
    if Fraction(value) < exact:
        return math.nextafter(value, _INF)
    return value


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed real interval ``[lo, hi]`` with ``lo <= hi``.

    The empty set is the singleton :data:`EMPTY`; it only comes out of
    :func:`intersect` and every arithmetic operation refuses it.
    """

    lo: float
    hi: float
    _empty: bool = False

    def __post_init__(self):
        if self._empty:
            return
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"interval lower bound {lo} exceeds upper bound {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, value: float) -> "Interval":
        return cls(value, value)

    @property
    def is_empty(self) -> bool:
        return self._empty

    @property
    def width(self) -> float:
        self._require()
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        self._require()
        return self.lo + 0.5 * (self.hi - self.lo)

    def contains(self, value: float) -> bool:
        return not self._empty and self.lo <= value <= self.hi

    def contains_zero(self) -> bool:
        return self.contains(0.0)

    def subset_of(self, other: "Interval") -> bool:
        if self._empty:
            return True
        return not other._empty and other.lo <= self.lo and self.hi <= other.hi

    def _require(self):
        if self._empty:
            raise EmptyIntervalError("operation on the empty interval")

    def __repr__(self) -> str:
        if self._empty:
            return "Interval.EMPTY"
        return f"[{self.lo!r}, {self.hi!r}]"

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)


EMPTY = Interval(math.nan, math.nan, _empty=True)


def _coerce(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(float(value))


def _check(*xs: Interval):
    for x in xs:
        if x.is_empty:
            raise EmptyIntervalError("operation on the empty interval")


def add(x: Interval, y: Interval) -> Interval:
    _check(x, y)
    lo = _down(x.lo + y.lo, Fraction(x.lo) + Fraction(y.lo))
    hi = _up(x.hi + y.hi, Fraction(x.hi) + Fraction(y.hi))
    return Interval(lo, hi)


def sub(x: Interval, y: Interval) -> Interval:
    _check(x, y)
    lo = _down(x.lo - y.hi, Fraction(x.lo) - Fraction(y.hi))
    hi = _up(x.hi - y.lo, Fraction(x.hi) - Fraction(y.lo))
    return Interval(lo, hi)


def neg(x: Interval) -> Interval:
    _check(x)
    return Interval(-x.hi, -x.lo)


def _products(x: Interval, y: Interval):
    for a in (x.lo, x.hi):
        for b in (y.lo, y.hi):
            yield a * b, Fraction(a) * Fraction(b)


def mul(x: Interval, y: Interval) -> Interval:
    _check(x, y)
    cands = list(_products(x, y))
    lo = min(_down(v, e) for v, e in cands)
    hi = max(_up(v, e) for v, e in cands)
    return Interval(lo, hi)


def div(x: Interval, y: Interval) -> Interval:
    """Quotient; raises :class:`DivisionByZeroInterval` when ``0 in y``."""
    _check(x, y)
    if y.contains_zero():
        raise DivisionByZeroInterval(f"divisor {y!r} contains zero")
    cands = []
    for a in (x.lo, x.hi):
        for b in (y.lo, y.hi):
            cands.append((a / b, Fraction(a) / Fraction(b)))
    lo = min(_down(v, e) for v, e in cands)
    hi = max(_up(v, e) for v, e in cands)
    return Interval(lo, hi)


def pow2(x: Interval) -> Interval:
    """Tight square: ``[0, max(lo², hi²)]`` whenever the interval straddles 0."""
    _check(x)
    sq_lo = (x.lo * x.lo, Fraction(x.lo) ** 2)
    sq_hi = (x.hi * x.hi, Fraction(x.hi) ** 2)
    hi = max(_up(*sq_lo), _up(*sq_hi))
    if x.lo <= 0.0 <= x.hi:
        return Interval(0.0, hi)
    lo = min(_down(*sq_lo), _down(*sq_hi))
    return Interval(lo, hi)


def _sqrt_down(a: float) -> float:
    s = math.sqrt(a)
    if Fraction(s) ** 2 > Fraction(a):
        s = math.nextafter(s, -_INF)
    return max(s, 0.0)


def _sqrt_up(a: float) -> float:
    s = math.sqrt(a)
    if Fraction(s) ** 2 < Fraction(a):
        s = math.nextafter(s, _INF)
    return s


def sqrt(x: Interval) -> Interval:
    """Square root of ``x ∩ [0, ∞)``; the negative part is silently clipped."""
    _check(x)
    if x.hi < 0.0:
        raise EmptyDomain(f"sqrt of {x!r}: no nonnegative part")
    return Interval(_sqrt_down(max(x.lo, 0.0)), _sqrt_up(x.hi))


def hull(x: Interval, y: Interval) -> Interval:
    if x.is_empty:
        return y
    if y.is_empty:
        return x
    return Interval(min(x.lo, y.lo), max(x.hi, y.hi))


def intersect(x: Interval, y: Interval) -> Interval:
    if x.is_empty or y.is_empty:
        return EMPTY
    lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
    if lo > hi:
        return EMPTY
    return Interval(lo, hi)


_DEFAULT_LABELS = ("x", "y", "z")


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned product of two or three nonempty intervals."""

    dims: tuple[Interval, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(self.dims)
        if len(dims) not in (2, 3):
            raise ValueError(f"a box has 2 or 3 dimensions, got {len(dims)}")
        if any(d.is_empty for d in dims):
            raise ValueError("box dimensions must be nonempty")
        labels = tuple(self.labels) or _DEFAULT_LABELS[: len(dims)]
        if len(labels) != len(dims):
            raise ValueError("one label per dimension")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_bounds(cls, bounds: Iterable[Sequence[float]]) -> "Box":
        """``Box.from_bounds([(x0, x1), (y0, y1), ...])``"""
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @classmethod
    def from_array(cls, arr) -> "Box":
        arr = np.asarray(arr, dtype=float)
        return cls.from_bounds(arr.tolist())

    @classmethod
    def cube(cls, center: Sequence[float], half_edge: float) -> "Box":
        return cls.from_bounds((c - half_edge, c + half_edge) for c in center)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(d.width for d in self.dims)

    @property
    def width(self) -> float:
        return max(self.widths)

    @property
    def midpoint(self) -> tuple[float, ...]:
        return tuple(d.mid for d in self.dims)

    def widest_axis(self) -> int:
        """Index of the widest dimension; ties go to the lowest index."""
        w = self.widths
        return w.index(max(w))

    def as_array(self) -> np.ndarray:
        return np.array([[d.lo, d.hi] for d in self.dims], dtype=float)

    def contains_point(self, point: Sequence[float]) -> bool:
        return all(d.contains(p) for d, p in zip(self.dims, point))

    def subset_of(self, other: "Box") -> bool:
        return all(a.subset_of(b) for a, b in zip(self.dims, other.dims))

    def inflate(self, amount: float) -> "Box":
        return Box(
            tuple(Interval(d.lo - amount, d.hi + amount) for d in self.dims), self.labels
        )

    def bisect(self, axis: int | None = None) -> tuple["Box", "Box"]:
        return bisect(self, self.widest_axis() if axis is None else axis)

    def __repr__(self) -> str:
        inner = " × ".join(repr(d) for d in self.dims)
        return f"Box({inner})"


def bisect(box: Box, axis: int) -> tuple[Box, Box]:
    """Split ``box`` at the midpoint of ``axis``; both halves share the cut plane."""
    d = box.dims[axis]
    if not d.width > 0.0:
        raise DegenerateAxis(f"axis {axis} of {box!r} has zero width")
    m = d.mid
    left = list(box.dims)
    right = list(box.dims)
    left[axis] = Interval(d.lo, m)
    right[axis] = Interval(m, d.hi)
    return Box(tuple(left), box.labels), Box(tuple(right), box.labels)
