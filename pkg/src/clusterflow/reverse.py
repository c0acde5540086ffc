"""Integer weight process run backwards in time.

Each step, every index ``i`` of the weight sequence is replaced by a tuple:
``(η, η)`` off the un-merge sites and ``(η, 2η, η)`` on them (the ``gap``
variant), or ``(η, η)`` and ``(0, 2η, 2η)`` (the ``cluster`` variant).
Neighbouring tuples overlap in one slot, where their end values add. The
slot holding ``left(tuple 0) + right(tuple -1)`` becomes index 0.

Weights are exact integers; the scaled mass ``(3/8)**t * sum(η)`` and the
other ledger entries are exact :class:`~fractions.Fraction` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .laws import RHO
from .renewal import RenewalTrace, sample_stationary_trace
from .rng import RngStream

VARIANTS = ("gap", "cluster")
MAX_STEPS = 25


class InvariantViolation(AssertionError):
    pass


@dataclass
class WeightSequence:
    weights: np.ndarray
    offset: int = 0
    t: int = 0
    variant: str = "gap"

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.int64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        self.weights = w
        self.offset = int(self.offset)

    @classmethod
    def unit(cls, indices=(0,), variant: str = "gap") -> "WeightSequence":
        """``sum(e_i for i in indices)``."""
        idx = sorted(int(i) for i in indices)
        if not idx:
            raise ValueError("need at least one index")
        w = np.zeros(idx[-1] - idx[0] + 1, dtype=np.int64)
        for i in idx:
            w[i - idx[0]] += 1
        return cls(w, idx[0], 0, variant)

    def __len__(self):
        return self.weights.size

    @property
    def first(self) -> int:
        return self.offset

    @property
    def last(self) -> int:
        return self.offset + self.weights.size - 1

    @property
    def total(self) -> int:
        return int(self.weights.sum())

    def support(self) -> tuple[int, int]:
        """First and last index with a nonzero weight."""
        nz = np.flatnonzero(self.weights)
        if nz.size == 0:
            raise ValueError("all weights are zero")
        return self.offset + int(nz[0]), self.offset + int(nz[-1])

    def as_dict(self) -> dict:
        return {self.offset + i: int(v) for i, v in enumerate(self.weights) if v}

    def rho_window(self, slack: int = 1) -> tuple[int, int]:
        """Window an un-merge trace must cover for the next step."""
        return min(self.first, 0) - slack, max(self.last, 0) + slack


def reverse_step(eta: WeightSequence, rho: RenewalTrace) -> WeightSequence:
    """Expand every index into its tuple and sum overlapping ends."""
    if rho.law != RHO:
        raise ValueError("un-merge sites must follow the rho renewal law")
    lo, hi = eta.rho_window(slack=0)
    if not rho.covers(lo, hi):
        raise ValueError(f"trace window {rho.window} too small; need [{lo}, {hi}]")
    new, new_offset = kernels.reverse_expand(
        eta.weights, eta.offset, rho.mask(), rho.lo, eta.variant == "cluster"
    )
    return WeightSequence(new, new_offset, eta.t + 1, eta.variant)


def mass(eta: WeightSequence) -> Fraction:
    """``(3/8)**t * sum(weights)`` as an exact fraction."""
    return Fraction(3**eta.t * eta.total, 8**eta.t)


def sum_squares_scaled(eta: WeightSequence) -> Fraction:
    """``sum(((3/8)**t * w)**2)`` exactly."""
    return Fraction(9**eta.t * kernels.sum_squares_exact(eta.weights), 64**eta.t)


@dataclass
class LedgerRow:
    t: int
    total_weight: int
    M: Fraction
    N_increment: Fraction
    sum_sq: Fraction


@dataclass
class MassLedger:
    rows: list = field(default_factory=list)
    base_max: int = 1
    base_width: int = 1

    def append(self, eta: WeightSequence, check: bool = True) -> LedgerRow:
        if not self.rows:
            lo, hi = eta.support()
            self.base_max = int(eta.weights.max())
            self.base_width = hi - lo + 1
        M = mass(eta)
        N = M - self.rows[-1].M if self.rows else Fraction(0)
        sq_int = kernels.sum_squares_exact(eta.weights)
        row = LedgerRow(eta.t, eta.total, M, N, Fraction(9**eta.t * sq_int, 64**eta.t))
        if check:
            check_invariants(eta, sq_int, self.base_max, self.base_width)
        self.rows.append(row)
        return row

    @property
    def M(self) -> list:
        return [r.M for r in self.rows]


def check_invariants(eta: WeightSequence, sq_int: int | None = None,
                     base_max: int = 1, base_width: int = 1) -> None:
    """Per-step bounds, checked in exact integer arithmetic.

    ``base_max`` and ``base_width`` describe the sequence at time 0; for a
    single unit weight they are 1 and the bounds read ``max w <= 2**t``,
    ``sum_sq <= (3/4)**t * M`` (that is ``sum(w**2) <= 2**t * sum(w)``) and
    support width ``<= 2**(t+1) + 1``. The max bound is for the gap variant
    only; each step at most doubles the largest weight and the width.
    """
    t = eta.t
    total = eta.total
    if total <= 0:
        raise InvariantViolation(f"t={t}: mass must stay positive")
    if sq_int is None:
        sq_int = kernels.sum_squares_exact(eta.weights)
    if eta.variant == "gap" and sq_int > (base_max * total) << t:
        raise InvariantViolation(f"t={t}: sum of squares bound violated")
    lo, hi = eta.support()
    if hi - lo + 1 > (base_width + 1) * 2**t + 1:
        raise InvariantViolation(f"t={t}: support width {hi - lo + 1} exceeds the doubling bound")
    if eta.variant == "gap" and int(eta.weights.max()) > base_max * 2**t:
        raise InvariantViolation(f"t={t}: max weight exceeds {base_max} * 2**t")


@dataclass
class ReverseTrajectory:
    """``traces[t]`` drove the step from ``states[t]`` to ``states[t + 1]``."""

    states: list
    ledger: MassLedger
    traces: list


def run_reverse(
    eta0: WeightSequence,
    steps: int,
    rng: RngStream | None = None,
    variant: str | None = None,
    traces=None,
    check: bool = True,
) -> ReverseTrajectory:
    """Run ``steps`` reverse steps with fresh stationary un-merge traces.

    Pass ``traces`` to replay recorded un-merge sites instead of sampling.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if steps > MAX_STEPS:
        raise ValueError(f"steps limited to {MAX_STEPS} (weights are int64)")
    if traces is None and rng is None:
        raise ValueError("need an RngStream or recorded traces")
    eta = eta0
    if variant is not None and variant != eta0.variant:
        eta = WeightSequence(eta0.weights, eta0.offset, eta0.t, variant)
    ledger = MassLedger()
    ledger.append(eta, check)
    states = [eta]
    used = []
    for k in range(steps):
        if traces is not None:
            rho = traces[k]
        else:
            rho = sample_stationary_trace(eta.rho_window(), RHO, rng)
        eta = reverse_step(eta, rho)
        ledger.append(eta, check)
        states.append(eta)
        used.append(rho)
    return ReverseTrajectory(states, ledger, used)


def trim(eta: WeightSequence) -> WeightSequence:
    """Drop everything left of the first nonzero weight (and trailing zeros); re-index from 0."""
    nz = np.flatnonzero(eta.weights)
    if nz.size == 0:
        raise ValueError("cannot trim an all-zero sequence")
    return WeightSequence(eta.weights[nz[0]:nz[-1] + 1], 0, eta.t, eta.variant)


SNAP = 1e-9


@dataclass
class StepDistribution:
    """Right-continuous step function with mass ``(3/8)**t * w[i]`` at ``(3/4)**t * i``."""

    weights: np.ndarray
    t: int

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.int64)
        self._cum = np.cumsum(self.weights)

    def __len__(self):
        return self.weights.size

    @property
    def spacing(self) -> float:
        return 0.75**self.t

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.weights.size) * self.spacing

    @property
    def masses(self) -> np.ndarray:
        return self.weights * 0.375**self.t

    def mass_exact(self, i: int) -> Fraction:
        return Fraction(3**self.t * int(self.weights[i]), 8**self.t)

    @property
    def total_mass(self) -> Fraction:
        return Fraction(3**self.t * int(self._cum[-1]), 8**self.t)

    def index_of(self, x):
        """``floor((4/3)**t * x)``, snapping values within 1e-9 of a jump onto it."""
        q = np.asarray(x, dtype=float) / self.spacing
        r = np.round(q)
        near = np.abs(q - r) <= SNAP * np.maximum(1.0, np.abs(q))
        return np.where(near, r, np.floor(q)).astype(np.int64)

    def cumulative_at_index(self, k):
        """Integer partial sums ``sum(w[:k+1])``, clipped to the support."""
        k = np.asarray(k, dtype=np.int64)
        out = np.where(k < 0, 0, self._cum[np.clip(k, 0, self.weights.size - 1)])
        return out

    def cumulative(self, x):
        return self.cumulative_at_index(self.index_of(x)) * 0.375**self.t

    def cumulative_exact(self, x) -> Fraction:
        k = math.floor(Fraction(x) * Fraction(4, 3) ** self.t)
        return Fraction(3**self.t * int(self.cumulative_at_index(k)), 8**self.t)


def step_distribution(eta: WeightSequence) -> StepDistribution:
    """Step function built from a trimmed weight sequence."""
    if eta.offset != 0 or eta.weights[0] == 0:
        eta = trim(eta)
    return StepDistribution(eta.weights, eta.t)


def laplace_transform(F: StepDistribution, s):
    """``sum(mass_i * exp(-s * x_i))``; exact total mass at ``s = 0``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("s must be nonnegative")
    if s_arr.ndim == 0:
        if s_arr == 0:
            return float(F.total_mass)
        return float(np.dot(F.masses, np.exp(-float(s_arr) * F.support)))
    out = np.exp(-np.outer(s_arr, F.support)) @ F.masses
    out[s_arr == 0] = float(F.total_mass)
    return out
