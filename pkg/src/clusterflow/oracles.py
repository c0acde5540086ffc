"""Exact-arithmetic reference computations by enumeration.

The un-merge sites on a finite window form a 0/1 pattern whose probability
under the stationary renewal law is a product: the stationary delay to the
first site, one inter-renewal mass per later site, and a survival tail after
the last site (or the delay tail if the window is empty).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .laws import RHO, RenewalLaw
from .renewal import RenewalTrace
from .reverse import WeightSequence, mass, reverse_step


def pattern_probability(points, lo: int, hi: int, law: RenewalLaw = RHO) -> Fraction:
    """Exact probability that the stationary trace on ``[lo, hi]`` equals ``points``."""
    points = sorted(points)
    if not points:
        return law.delay_survival(hi - lo + 1)
    p = law.delay_pmf(points[0] - lo)
    for a, b in zip(points, points[1:]):
        p *= law.pmf(b - a)
    return p * law.survival(hi - points[-1])


def enumerate_patterns(lo: int, hi: int, law: RenewalLaw = RHO):
    """Yield ``(RenewalTrace, probability)`` for every 0/1 pattern on the window."""
    idx = np.arange(lo, hi + 1)
    for bits in product((False, True), repeat=hi - lo + 1):
        pts = idx[np.array(bits, dtype=bool)]
        yield RenewalTrace((lo, hi), pts, law), pattern_probability(pts.tolist(), lo, hi, law)


def _key(eta: WeightSequence):
    return (tuple(eta.weights.tolist()), eta.offset, eta.t, eta.variant)


def expected_next_mass(eta: WeightSequence) -> Fraction:
    """Exact ``E[M(t+1) | η(t)]`` over all un-merge patterns."""
    lo, hi = eta.rho_window(slack=0)
    total_p = Fraction(0)
    acc = Fraction(0)
    for trace, p in enumerate_patterns(lo, hi):
        total_p += p
        acc += p * mass(reverse_step(eta, trace))
    if total_p != 1:
        raise AssertionError(f"pattern probabilities sum to {total_p}")
    return acc


def expected_mass(eta0: WeightSequence, t: int) -> Fraction:
    """Exact ``E[M(t)]`` by enumerating every un-merge history of length ``t``."""

    @lru_cache(maxsize=None)
    def go(key, remaining):
        w, off, t0, variant = key
        eta = WeightSequence(np.array(w, dtype=np.int64), off, t0, variant)
        if remaining == 0:
            return mass(eta)
        lo, hi = eta.rho_window(slack=0)
        acc = Fraction(0)
        for trace, p in enumerate_patterns(lo, hi):
            acc += p * go(_key(reverse_step(eta, trace)), remaining - 1)
        return acc

    return go(_key(eta0), t)


def reachable_states(eta0: WeightSequence, t: int):
    """All states reachable in exactly ``t`` steps (deduplicated)."""
    frontier = {_key(eta0): eta0}
    for _ in range(t):
        nxt = {}
        for eta in frontier.values():
            lo, hi = eta.rho_window(slack=0)
            for trace, _p in enumerate_patterns(lo, hi):
                e = reverse_step(eta, trace)
                nxt[_key(e)] = e
        frontier = nxt
    return list(frontier.values())
