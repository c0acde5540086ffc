"""Stationary integer renewal traces on finite windows."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laws import RenewalLaw
from .rng import RngStream


@dataclass
class RenewalTrace:
    """Points of a renewal process restricted to the closed window ``[lo, hi]``."""

    window: tuple[int, int]
    points: np.ndarray
    law: RenewalLaw

    def __post_init__(self):
        lo, hi = self.window
        pts = np.asarray(self.points, dtype=np.int64)
        if hi < lo:
            raise ValueError(f"empty window {self.window}")
        if pts.size and (pts[0] < lo or pts[-1] > hi or np.any(np.diff(pts) <= 0)):
            raise ValueError("points must be strictly increasing and inside the window")
        self.points = pts
        self.window = (int(lo), int(hi))

    @property
    def lo(self) -> int:
        return self.window[0]

    @property
    def hi(self) -> int:
        return self.window[1]

    def __len__(self):
        return self.hi - self.lo + 1

    def mask(self) -> np.ndarray:
        m = np.zeros(len(self), dtype=bool)
        m[self.points - self.lo] = True
        return m

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def count_in(self, lo: int, hi: int) -> int:
        """``|points ∩ [lo, hi]|``; an empty interval gives 0."""
        if hi < lo:
            return 0
        return int(
            np.searchsorted(self.points, hi, side="right")
            - np.searchsorted(self.points, lo, side="left")
        )

    def shifted(self, s: int) -> "RenewalTrace":
        return RenewalTrace((self.lo - s, self.hi - s), self.points - s, self.law)


def sample_stationary_trace(window, law: RenewalLaw, rng: RngStream) -> RenewalTrace:
    """Stationary renewal realisation on ``window = (lo, hi)``.

    The first point at or after ``lo`` sits at ``lo + D`` with ``D`` drawn from
    the stationary delay law; later points follow i.i.d. inter-renewal draws.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError(f"empty window {window}")
    length = hi - lo + 1
    first = lo + law.sample_delay(rng)
    if first > hi:
        return RenewalTrace((lo, hi), np.empty(0, dtype=np.int64), law)

    remaining = hi - first
    chunks = [np.array([first], dtype=np.int64)]
    last = first
    while True:
        k = int(remaining / law.mean * 1.25) + 8
        steps = law.sample(k, rng)
        pts = last + np.cumsum(steps)
        chunks.append(pts[pts <= hi])
        if pts[-1] > hi:
            break
        last = int(pts[-1])
        remaining = hi - last
    points = np.concatenate(chunks)
    assert points.size <= length
    return RenewalTrace((lo, hi), points, law)


def counting_function(trace: RenewalTrace, i: int) -> int:
    """``|trace ∩ [0, i]| - |trace ∩ [-i, 0)|``."""
    i = int(i)
    r = abs(i)
    if not trace.covers(-r, r):
        raise ValueError(f"query {i} needs [{-r}, {r}] inside window {trace.window}")
    return trace.count_in(0, i) - trace.count_in(-i, -1)
