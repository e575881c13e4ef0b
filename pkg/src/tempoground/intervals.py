"""Time windows and 1-D interval-set measure.

A :class:`TimeWindow` is a half-open ``[start_s, end_s)`` span in seconds.
Window lists may overlap; :func:`union` canonicalises them into sorted,
disjoint spans so that lengths and intersections are well defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .errors import DomainError


@dataclass(frozen=True, order=True)
class TimeWindow:
    start_s: float
    end_s: float

    def __post_init__(self):
        s, e = float(self.start_s), float(self.end_s)
        if not (math.isfinite(s) and math.isfinite(e)):
            raise DomainError(f"non-finite window bounds ({s}, {e})")
        if s < 0 or not s < e:
            raise DomainError(f"invalid window ({s}, {e}): need 0 <= start < end")
        object.__setattr__(self, "start_s", s)
        object.__setattr__(self, "end_s", e)

    @property
    def length(self) -> float:
        return self.end_s - self.start_s

    def rounded(self, ndigits: int = 2) -> "TimeWindow":
        return TimeWindow(round(self.start_s, ndigits), round(self.end_s, ndigits))

    def shifted(self, delta_s: float) -> "TimeWindow":
        return TimeWindow(self.start_s + delta_s, self.end_s + delta_s)

    def intersect(self, other: "TimeWindow") -> "TimeWindow | None":
        s = max(self.start_s, other.start_s)
        e = min(self.end_s, other.end_s)
        return TimeWindow(s, e) if s < e else None

    def as_pair(self) -> Tuple[float, float]:
        return (self.start_s, self.end_s)

    @classmethod
    def from_pair(cls, pair: Sequence[float]) -> "TimeWindow":
        start, end = pair
        return cls(start, end)


def union(windows: Iterable[TimeWindow]) -> List[TimeWindow]:
    """Merge overlapping or touching windows into a sorted disjoint list."""
    merged: List[List[float]] = []
    for w in sorted(windows):
        if merged and w.start_s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], w.end_s)
        else:
            merged.append([w.start_s, w.end_s])
    return [TimeWindow(s, e) for s, e in merged]


def measure(windows: Iterable[TimeWindow]) -> float:
    return sum(w.length for w in union(windows))


def intersection_measure(a: Iterable[TimeWindow], b: Iterable[TimeWindow]) -> float:
    """Length of ``union(a) & union(b)`` by a two-pointer sweep."""
    ua, ub = union(a), union(b)
    i = j = 0
    total = 0.0
    while i < len(ua) and j < len(ub):
        lo = max(ua[i].start_s, ub[j].start_s)
        hi = min(ua[i].end_s, ub[j].end_s)
        if hi > lo:
            total += hi - lo
        if ua[i].end_s <= ub[j].end_s:
            i += 1
        else:
            j += 1
    return total
