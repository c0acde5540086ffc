"""Forward clustering dynamics on a circle of ``n`` points.

Each step every point moves halfway toward its left or right neighbour; points
that land on the same spot merge; the configuration is then rescaled to unit
intensity. The state is tracked at the gap level (:class:`GapSequence`) and,
when positions are needed, at the point level (:class:`PointConfiguration`).
Both levels share the same :class:`DirectionField` so they can be compared
step by step.

Merges are read off the direction pattern, never off floating-point equality:
gap ``i`` closes exactly when point ``i`` moves right and point ``i + 1``
moves left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .laws import TAU
from .renewal import RenewalTrace, sample_stationary_trace
from .rng import RngStream

ALGORITHMS = ("alg1", "alg2")
INTENSITY_MODES = ("theoretical", "empirical")
THEORETICAL_FACTOR = 0.75
LENGTH_RTOL = 1e-12


class DegenerateConfiguration(RuntimeError):
    """Raised when merging leaves fewer than two points on the circle."""


@dataclass
class GapSequence:
    gaps: np.ndarray
    intensity_mode: str = "theoretical"

    def __post_init__(self):
        g = np.ascontiguousarray(self.gaps, dtype=np.float64)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("a gap sequence needs at least two gaps")
        if not np.all(g > 0):
            raise ValueError("gaps must be strictly positive")
        if self.intensity_mode not in INTENSITY_MODES:
            raise ValueError(f"unknown intensity mode {self.intensity_mode!r}")
        self.gaps = g

    def __len__(self):
        return self.gaps.size

    @property
    def length(self) -> float:
        return float(self.gaps.sum())

    def roll_to(self, k: int) -> "GapSequence":
        """Re-index so that old gap ``k`` becomes gap 0."""
        return GapSequence(np.roll(self.gaps, -int(k)), self.intensity_mode)


@dataclass
class PointConfiguration:
    """Increasing positions on a circle; ``positions[0]`` is the anchor."""

    positions: np.ndarray
    circumference: float

    def __post_init__(self):
        p = np.ascontiguousarray(self.positions, dtype=np.float64)
        if p.size < 1:
            raise ValueError("empty configuration")
        if p.size > 1 and not np.all(np.diff(p) > 0):
            raise ValueError("positions must be strictly increasing")
        if p[-1] - p[0] >= self.circumference:
            raise ValueError("positions span more than one circumference")
        self.positions = p
        self.circumference = float(self.circumference)

    def __len__(self):
        return self.positions.size

    @property
    def anchor(self) -> float:
        return float(self.positions[0])

    def gaps(self) -> np.ndarray:
        p = self.positions
        return np.append(np.diff(p), p[0] + self.circumference - p[-1])

    @classmethod
    def from_gaps(cls, gaps, anchor: float = 0.0) -> "PointConfiguration":
        g = np.asarray(gaps.gaps if isinstance(gaps, GapSequence) else gaps, dtype=float)
        pos = anchor + np.concatenate([[0.0], np.cumsum(g[:-1])])
        return cls(pos, float(g.sum()))


@dataclass
class DirectionField:
    """``right[i]`` is True when point ``i`` moves toward point ``i + 1``."""

    right: np.ndarray
    algorithm: str = "alg1"
    p_right: np.ndarray | None = None

    def __len__(self):
        return self.right.size


@dataclass
class MergeRecord:
    """Gaps closed in one step; ``merged[i]`` means points ``i`` and ``i+1`` met."""

    merged: np.ndarray
    survivor_map: np.ndarray | None = None

    @property
    def merged_gap_indices(self) -> np.ndarray:
        return np.flatnonzero(self.merged)

    @property
    def count(self) -> int:
        return int(self.merged.sum())


@dataclass
class Genealogy:
    """Number of initial points absorbed into each current point."""

    multiplicity: np.ndarray

    @classmethod
    def singletons(cls, n: int) -> "Genealogy":
        return cls(np.ones(n, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.multiplicity.sum())


def right_probabilities(gaps: GapSequence | np.ndarray, algorithm: str) -> np.ndarray:
    """Per-point probability of moving right.

    ``alg2`` picks ``P(R at i) = Γ[i-1] / (Γ[i-1] + Γ[i])`` so that the expected
    displacement ``P(R)·Γ[i]/2 - P(L)·Γ[i-1]/2`` is zero.
    """
    g = gaps.gaps if isinstance(gaps, GapSequence) else np.asarray(gaps, dtype=float)
    if algorithm == "alg1":
        return np.full(g.size, 0.5)
    if algorithm == "alg2":
        prev = np.roll(g, 1)
        return prev / (prev + g)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def sample_directions(gaps: GapSequence, algorithm: str, rng: RngStream) -> DirectionField:
    p = right_probabilities(gaps, algorithm)
    right = rng.gen.random(p.size) < p
    return DirectionField(right, algorithm, p if algorithm == "alg2" else None)


def tentative_gaps(gaps: GapSequence, dirs: DirectionField):
    """Gaps after the halfway moves, with closed gaps at zero.

    Returns ``(tentative, MergeRecord)``. The four cases for gap ``i`` with
    endpoint directions ``(d_i, d_{i+1})``::

        (R, R) -> (Γ[i] + Γ[i+1]) / 2
        (L, L) -> (Γ[i-1] + Γ[i]) / 2
        (L, R) -> Γ[i-1]/2 + Γ[i] + Γ[i+1]/2
        (R, L) -> 0, merged
    """
    if len(dirs) != len(gaps):
        raise ValueError(f"{len(dirs)} directions for {len(gaps)} gaps")
    tent, merged = kernels.tentative_gaps(gaps.gaps, dirs.right)
    if np.any(merged & np.roll(merged, -1)):
        raise AssertionError("cyclically adjacent merges are impossible")
    return tent, MergeRecord(merged)


def rescale_factor(kept: np.ndarray, mode: str) -> float:
    if mode == "theoretical":
        return THEORETICAL_FACTOR
    if mode == "empirical":
        return kept.size / float(kept.sum())
    raise ValueError(f"unknown intensity mode {mode!r}")


def fold_and_rescale(tentative, merges: MergeRecord, mode: str = "theoretical") -> GapSequence:
    """Delete closed gaps, re-index, and rescale to unit intensity."""
    tentative = np.asarray(tentative, dtype=np.float64)
    if np.any(tentative[merges.merged] != 0):
        raise ValueError("merged gaps must have tentative length 0")
    kept = tentative[~merges.merged]
    if kept.size < 2:
        raise DegenerateConfiguration("fewer than two points left after merging")
    return GapSequence(kept * rescale_factor(kept, mode), mode)


def _check_length(before: float, after: np.ndarray):
    total = float(after.sum())
    if abs(total - before) > LENGTH_RTOL * before:
        raise AssertionError(f"length not conserved: {before!r} -> {total!r}")


def forward_step(
    gaps: GapSequence,
    genealogy: Genealogy | None,
    algorithm: str,
    rng: RngStream,
    mode: str | None = None,
    dirs: DirectionField | None = None,
):
    """One step of the dynamics. Returns ``(gaps, genealogy, merges)``.

    ``dirs`` may be supplied to replay a known set of moves.
    """
    mode = mode or gaps.intensity_mode
    if algorithm == "alg2" and mode != "empirical":
        raise ValueError("alg2 has no closed-form merge rate; use intensity_mode='empirical'")
    if dirs is None:
        dirs = sample_directions(gaps, algorithm, rng)
    tent, merges = tentative_gaps(gaps, dirs)
    _check_length(gaps.length, tent)

    mult = genealogy.multiplicity if genealogy is not None else np.ones(len(gaps), np.int64)
    kept, new_mult, survivor = kernels.fold(tent, merges.merged, mult)
    if kept.size < 2:
        raise DegenerateConfiguration("fewer than two points left after merging")
    merges.survivor_map = survivor
    new_gaps = GapSequence(kept * rescale_factor(kept, mode), mode)
    new_gen = Genealogy(new_mult) if genealogy is not None else None
    return new_gaps, new_gen, merges


def point_step(points: PointConfiguration, dirs: DirectionField):
    """Move points halfway and merge, without rescaling.

    Returns ``(PointConfiguration, MergeRecord)``. When the closing gap is
    the wrap-around gap, the surviving point is point 0.
    """
    g = points.gaps()
    if len(dirs) != g.size:
        raise ValueError(f"{len(dirs)} directions for {g.size} points")
    prev = np.roll(g, 1)
    moved = np.where(dirs.right, points.positions + 0.5 * g, points.positions - 0.5 * prev)
    merged = dirs.right & ~np.roll(dirs.right, -1)
    keep = ~merged
    if keep.sum() < 2:
        raise DegenerateConfiguration("fewer than two points left after merging")
    # the left end of every kept gap survives; a closed gap's left end sits on its right end
    new = PointConfiguration(moved[keep], points.circumference)
    rank = np.cumsum(keep) - 1
    return new, MergeRecord(merged, np.where(merged, np.roll(rank, -1), rank))


def rescale_points(points: PointConfiguration, mode: str) -> PointConfiguration:
    g = points.gaps()
    factor = rescale_factor(g, mode)
    return PointConfiguration(points.positions * factor, points.circumference * factor)


def palm_index(n: int, rng: RngStream) -> int:
    return int(rng.gen.integers(0, n))


def palm_shift(points: PointConfiguration, rng: RngStream, k: int | None = None) -> PointConfiguration:
    """Translate a uniformly chosen point to the origin and make it index 0."""
    if len(points) == 0:
        raise ValueError("empty configuration")
    if k is None:
        k = palm_index(len(points), rng)
    p = points.positions
    x0 = p[k]
    shifted = np.concatenate([p[k:] - x0, p[:k] + points.circumference - x0])
    return PointConfiguration(shifted, points.circumference)


@dataclass
class ForwardTrajectory:
    """Recorded states of one forward run.

    ``gaps``/``multiplicity`` are keyed by time step (only checkpoints are
    kept). ``lineage[t]`` is the size of the cluster holding initial point 0.
    ``positions`` holds unrescaled positions per step when requested.
    """

    gaps: dict = field(default_factory=dict)
    multiplicity: dict = field(default_factory=dict)
    merges: list = field(default_factory=list)
    lineage: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    @property
    def final_gaps(self) -> GapSequence:
        return self.gaps[max(self.gaps)]


def run_forward(
    initial: GapSequence,
    steps: int,
    algorithm: str = "alg1",
    rng: RngStream | None = None,
    mode: str | None = None,
    checkpoints=None,
    record_points: bool = False,
    record_merges: bool = False,
) -> ForwardTrajectory:
    """Apply :func:`forward_step` ``steps`` times.

    ``checkpoints`` selects which times to store (default: all). With
    ``record_points`` the point-level configuration is evolved alongside,
    with the same moves, and stored in unrescaled coordinates.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if rng is None:
        raise ValueError("an RngStream is required")
    mode = mode or initial.intensity_mode
    keep = None if checkpoints is None else set(int(c) for c in checkpoints)
    traj = ForwardTrajectory()

    gaps = GapSequence(initial.gaps, mode)
    gen = Genealogy.singletons(len(gaps))
    points = PointConfiguration.from_gaps(gaps) if record_points else None
    scale = 1.0
    tagged = 0

    def record(t):
        traj.counts.append(len(gaps))
        traj.lineage.append(int(gen.multiplicity[tagged]))
        if keep is None or t in keep:
            traj.gaps[t] = gaps
            traj.multiplicity[t] = gen.multiplicity
        if record_points:
            traj.positions.append(points.positions / scale)

    record(0)
    for t in range(1, steps + 1):
        dirs = sample_directions(gaps, algorithm, rng)
        new_gaps, gen, merges = forward_step(gaps, gen, algorithm, rng, mode, dirs=dirs)
        if record_points:
            moved, _ = point_step(points, dirs)
            points = rescale_points(moved, mode)
            scale *= points.circumference / moved.circumference
        tagged = int(merges.survivor_map[tagged])
        gaps = new_gaps
        if record_merges:
            traj.merges.append(merges)
        record(t)
    return traj


def averaging_literal(gaps: GapSequence, rng: RngStream) -> np.ndarray:
    """Row-wise averaging with an independent fair coin per row.

    Row ``i`` is ``(e_i + e_{i+1}) / 2`` or ``(e_i + e_{i-1}) / 2``. Unlike the
    exact dynamics, neighbouring rows do not share a coin, so no gap closes.
    """
    g = gaps.gaps
    coin = rng.gen.random(g.size) < 0.5
    return np.where(coin, 0.5 * g + 0.5 * np.roll(g, -1), 0.5 * g + 0.5 * np.roll(g, 1))


def folding_literal(seq, trace: RenewalTrace, mode: str = "theoretical") -> GapSequence:
    """Fold an averaged sequence along merge sites ``trace``.

    Site ``j`` adds inputs ``j`` and ``j + 1`` into one output gap; other inputs
    pass through. Output index of input ``j`` is ``j - N(j - 1)`` with ``N`` the
    count of sites in ``[0, j - 1]``, and every row carries the factor 3/4
    (or the empirical normaliser). A site at ``n - 1`` would wrap onto gap 0
    and is ignored.
    """
    seq = np.asarray(seq, dtype=np.float64)
    n = seq.size
    if trace.lo > 0 or trace.hi < n - 1:
        raise ValueError(f"trace window {trace.window} does not cover [0, {n - 1}]")
    sites = np.zeros(n, dtype=bool)
    pts = trace.points[(trace.points >= 0) & (trace.points <= n - 2)]
    sites[pts] = True
    # N(j - 1) for every input j; input j + 1 after a site lands on the same output
    before = np.concatenate([[0], np.cumsum(sites)[:-1]])
    out_index = np.arange(n) - before
    folded = np.bincount(out_index, weights=seq)
    if folded.size < 2:
        raise DegenerateConfiguration("fewer than two gaps after folding")
    return GapSequence(folded * rescale_factor(folded, mode), mode)


def literal_step(gaps: GapSequence, rng: RngStream, mode: str | None = None) -> GapSequence:
    """Averaging then folding with merge sites drawn independently of the coins."""
    mode = mode or gaps.intensity_mode
    averaged = averaging_literal(gaps, rng)
    tau = sample_stationary_trace((0, len(gaps) - 1), TAU, rng)
    return folding_literal(averaged, tau, mode)
