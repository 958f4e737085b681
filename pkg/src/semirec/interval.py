"""Closed intervals with outward-rounded endpoints.

Arithmetic on finite endpoints is carried out exactly in rationals and the
result is rounded down (lower endpoint) or up (upper endpoint) to the
nearest float.  Exact results therefore stay exact, which matters for
certificates such as ``x^2([-inf, 0]) ⊆ [0, inf]``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .verdict import DomainError

INF = math.inf
_MAX = sys.float_info.max


def round_down(q: Fraction) -> float:
    try:
        f = float(q)
    except OverflowError:
        return _MAX if q > 0 else -INF
    if Fraction(f) > q:
        f = math.nextafter(f, -INF)
    return f


def round_up(q: Fraction) -> float:
    try:
        f = float(q)
    except OverflowError:
        return INF if q > 0 else -_MAX
    if Fraction(f) < q:
        f = math.nextafter(f, INF)
    return f


def _is_finite(v: float) -> bool:
    return not math.isinf(v)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if self.lo == INF or self.hi == -INF:
            raise ValueError("interval must contain a real number")

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(float(v), float(v))

    @property
    def bounded(self) -> bool:
        return _is_finite(self.lo) and _is_finite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def meets_open(self, lo: float, hi: float) -> bool:
        """True if this closed interval meets the open interval (lo, hi)."""
        return self.lo < hi and self.hi > lo

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(_add(self.lo, other.lo, down=True), _add(self.hi, other.hi, down=False))

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        lo = min(_mul(a, b, down=True) for a, b in pairs)
        hi = max(_mul(a, b, down=False) for a, b in pairs)
        return Interval(lo, hi)

    def __truediv__(self, other: "Interval") -> "Interval":
        if other.lo <= 0.0 <= other.hi:
            raise DomainError(f"division by an interval containing zero: {other}")
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        lo = min(_div(a, b, down=True) for a, b in pairs)
        hi = max(_div(a, b, down=False) for a, b in pairs)
        return Interval(lo, hi)

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if n == 0:
            return Interval(1.0, 1.0)
        if n % 2 == 1:
            return Interval(_pow(self.lo, n, down=True), _pow(self.hi, n, down=False))
        if self.lo >= 0:
            return Interval(_pow(self.lo, n, down=True), _pow(self.hi, n, down=False))
        if self.hi <= 0:
            return Interval(_pow(-self.hi, n, down=True), _pow(-self.lo, n, down=False))
        m = max(-self.lo, self.hi)
        return Interval(0.0, _pow(m, n, down=False))

    def __abs__(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def _add(a: float, b: float, down: bool) -> float:
    if math.isinf(a) or math.isinf(b):
        return a + b
    q = Fraction(a) + Fraction(b)
    return round_down(q) if down else round_up(q)


def _mul(a: float, b: float, down: bool) -> float:
    # 0 * inf is taken as 0: the limit rule for products of closed intervals
    if a == 0.0 or b == 0.0:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF if (a > 0) == (b > 0) else -INF
    q = Fraction(a) * Fraction(b)
    return round_down(q) if down else round_up(q)


def _div(a: float, b: float, down: bool) -> float:
    if math.isinf(b):
        if math.isinf(a):
            return -INF if down else INF
        return 0.0
    if math.isinf(a):
        return INF if (a > 0) == (b > 0) else -INF
    q = Fraction(a) / Fraction(b)
    return round_down(q) if down else round_up(q)


def _pow(a: float, n: int, down: bool) -> float:
    if math.isinf(a):
        return a if n % 2 == 1 else INF
    q = Fraction(a) ** n
    return round_down(q) if down else round_up(q)


# Transcendental enclosures rely on the platform libm being accurate to a
# few ulps; the slack below is far above that.
_SLACK = 4e-16


def _widen(lo: float, hi: float, floor: float = -INF, ceil: float = INF) -> Interval:
    lo = max(floor, lo - _SLACK * max(1.0, abs(lo)))
    hi = min(ceil, hi + _SLACK * max(1.0, abs(hi)))
    return Interval(lo, hi)


def _hits_lattice(lo: float, hi: float, offset: float, period: float) -> bool:
    k = math.ceil((lo - offset) / period - 1e-9)
    return offset + k * period <= hi + 1e-9


def sin(iv: Interval) -> Interval:
    if not iv.bounded:
        raise DomainError("sin is not evaluated on unbounded boxes")
    if iv.width >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.sin(iv.lo), math.sin(iv.hi)
    lo, hi = min(a, b), max(a, b)
    if _hits_lattice(iv.lo, iv.hi, math.pi / 2, 2 * math.pi):
        hi = 1.0
    if _hits_lattice(iv.lo, iv.hi, -math.pi / 2, 2 * math.pi):
        lo = -1.0
    return _widen(lo, hi, -1.0, 1.0)


def cos(iv: Interval) -> Interval:
    if not iv.bounded:
        raise DomainError("cos is not evaluated on unbounded boxes")
    if iv.width >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.cos(iv.lo), math.cos(iv.hi)
    lo, hi = min(a, b), max(a, b)
    if _hits_lattice(iv.lo, iv.hi, 0.0, 2 * math.pi):
        hi = 1.0
    if _hits_lattice(iv.lo, iv.hi, math.pi, 2 * math.pi):
        lo = -1.0
    return _widen(lo, hi, -1.0, 1.0)


def sqrt(iv: Interval) -> Interval:
    if iv.lo < 0:
        raise DomainError(f"sqrt of an interval reaching below zero: {iv}")
    lo = math.sqrt(iv.lo)
    hi = math.sqrt(iv.hi)
    return Interval(max(0.0, math.nextafter(lo, -INF)) if lo > 0 else 0.0, math.nextafter(hi, INF) if _is_finite(hi) else INF)


def asin(iv: Interval) -> Interval:
    if not iv.bounded:
        raise DomainError("asin is not evaluated on unbounded boxes")
    if iv.lo < -1 or iv.hi > 1:
        raise DomainError(f"asin outside [-1, 1]: {iv}")
    return _widen(math.asin(iv.lo), math.asin(iv.hi), -math.pi / 2 - 1e-15, math.pi / 2 + 1e-15)


def acos(iv: Interval) -> Interval:
    if not iv.bounded:
        raise DomainError("acos is not evaluated on unbounded boxes")
    if iv.lo < -1 or iv.hi > 1:
        raise DomainError(f"acos outside [-1, 1]: {iv}")
    return _widen(math.acos(iv.hi), math.acos(iv.lo), 0.0, math.pi + 1e-15)


Box = tuple  # tuple[Interval, ...]


def as_box(value) -> Box:
    """Coerce an Interval, a (lo, hi) pair or a sequence of either into a box."""
    if isinstance(value, Interval):
        return (value,)
    if isinstance(value, Sequence) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return (Interval(float(value[0]), float(value[1])),)
    out = []
    for v in value:
        if isinstance(v, Interval):
            out.append(v)
        else:
            lo, hi = v
            out.append(Interval(float(lo), float(hi)))
    return tuple(out)


def box_subset(inner: Box, outer: Box) -> bool:
    return all(a.subset_of(b) for a, b in zip(inner, outer))


def box_in_union(inner: Box, union: Iterable[Box]) -> bool:
    """Containment of a box in a finite union of boxes.

    In one dimension touching intervals are merged first, which makes the
    test exact.  In higher dimensions containment in a single member is
    required, a sound but conservative criterion.
    """
    union = list(union)
    if len(inner) == 1:
        return any(inner[0].subset_of(iv) for iv in merge_intervals(b[0] for b in union))
    return any(box_subset(inner, b) for b in union)


def merge_intervals(intervals: Iterable[Interval]) -> list[Interval]:
    ivs = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    merged: list[Interval] = []
    for iv in ivs:
        if merged and iv.lo <= merged[-1].hi:
            merged[-1] = merged[-1].hull(iv)
        else:
            merged.append(iv)
    return merged


def box_meets_open_ball_box(box: Box, center: Sequence[float], radius: float) -> bool:
    """Whether a closed box meets the open coordinate box of half-width ``radius``."""
    return all(iv.meets_open(c - radius, c + radius) for iv, c in zip(box, center))


def point_box_distance(point: Sequence[float], box: Box) -> float:
    """Euclidean distance from a point to a closed box (0 inside)."""
    total = 0.0
    for x, iv in zip(point, box):
        if x < iv.lo:
            d = iv.lo - x
        elif x > iv.hi:
            d = x - iv.hi
        else:
            d = 0.0
        total += d * d
    return math.sqrt(total)
