"""Test sets: finite unions of intervals and points, plus tagged null skeletons."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .measures import IFS


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval has lo > hi: ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        left = (x >= self.lo) if self.lo_closed else (x > self.lo)
        right = (x <= self.hi) if self.hi_closed else (x < self.hi)
        return left & right


@dataclass(frozen=True)
class Skeleton:
    """A Lebesgue-null set described by tags rather than enumeration.

    ``points`` are explicit atom locations, ``power_families`` holds exponents
    ``p`` standing for the countable set ``{i**-p : i >= 1}``, and
    ``attractors`` holds IFS records whose attractors belong to the set.
    """

    points: tuple[float, ...] = ()
    power_families: tuple[float, ...] = ()
    attractors: tuple["IFS", ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(set(float(p) for p in self.points))))


@dataclass(frozen=True)
class BorelTestSet:
    intervals: tuple[Interval, ...] = ()
    points: tuple[float, ...] = ()
    skeleton: Skeleton | None = None

    def __post_init__(self):
        intervals, points = _canonicalize(self.intervals, self.points)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "points", points)

    @classmethod
    def interval(cls, lo, hi, lo_closed=True, hi_closed=True) -> "BorelTestSet":
        return cls(intervals=(Interval(lo, hi, lo_closed, hi_closed),))

    @classmethod
    def of_points(cls, points: Iterable[float]) -> "BorelTestSet":
        return cls(points=tuple(points))

    @classmethod
    def of_skeleton(cls, skeleton: Skeleton) -> "BorelTestSet":
        return cls(skeleton=skeleton)

    def union(self, other: "BorelTestSet") -> "BorelTestSet":
        skeleton = self.skeleton
        if other.skeleton is not None:
            if skeleton is None:
                skeleton = other.skeleton
            else:
                skeleton = Skeleton(
                    skeleton.points + other.skeleton.points,
                    skeleton.power_families + other.skeleton.power_families,
                    skeleton.attractors + other.skeleton.attractors,
                    label=" | ".join(s for s in (skeleton.label, other.skeleton.label) if s),
                )
        return BorelTestSet(self.intervals + other.intervals, self.points + other.points, skeleton)

    def contains(self, x) -> np.ndarray:
        """Membership of ``x`` in the interval and point parts (skeleton ignored)."""
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for iv in self.intervals:
            inside |= iv.contains(x)
        if self.points:
            inside |= np.isin(x, np.asarray(self.points))
        return inside

    def is_disjoint(self, other: "BorelTestSet") -> bool:
        if self.skeleton is not None or other.skeleton is not None:
            raise ValueError("disjointness is only decided for interval/point sets")
        for a in self.intervals:
            for b in other.intervals:
                if _overlap(a, b):
                    return False
        if self.points and np.any(other.contains(self.points)):
            return False
        if other.points and np.any(self.contains(other.points)):
            return False
        return True


def _overlap(a: Interval, b: Interval) -> bool:
    if a.hi < b.lo or b.hi < a.lo:
        return False
    if a.hi == b.lo:
        return a.hi_closed and b.lo_closed
    if b.hi == a.lo:
        return b.hi_closed and a.lo_closed
    return True


def _merge(ivs):
    ivs = sorted(ivs, key=lambda iv: (iv.lo, not iv.lo_closed))
    merged: list[Interval] = []
    for iv in ivs:
        if merged:
            last = merged[-1]
            touching = iv.lo < last.hi or (iv.lo == last.hi and (last.hi_closed or iv.lo_closed))
            if touching:
                if iv.hi > last.hi:
                    hi, hi_closed = iv.hi, iv.hi_closed
                elif iv.hi == last.hi:
                    hi, hi_closed = last.hi, last.hi_closed or iv.hi_closed
                else:
                    hi, hi_closed = last.hi, last.hi_closed
                merged[-1] = Interval(last.lo, hi, last.lo_closed, hi_closed)
                continue
        merged.append(iv)
    return merged


def _canonicalize(intervals, points):
    ivs = []
    pts = set(float(p) for p in points)
    for iv in intervals:
        if iv.is_empty:
            continue
        if iv.is_point:
            pts.add(float(iv.lo))
            continue
        ivs.append(iv)
    merged = _merge(ivs)
    # absorb points lying inside an interval or closing an open endpoint
    leftover = []
    for p in sorted(pts):
        absorbed = False
        for i, iv in enumerate(merged):
            if bool(iv.contains(p)):
                absorbed = True
                break
            if p == iv.lo:
                merged[i] = Interval(iv.lo, iv.hi, True, iv.hi_closed)
                absorbed = True
                break
            if p == iv.hi:
                merged[i] = Interval(iv.lo, iv.hi, iv.lo_closed, True)
                absorbed = True
                break
        if not absorbed:
            leftover.append(p)
    # a point may close the gap between two intervals
    return tuple(_merge(merged)), tuple(leftover)
