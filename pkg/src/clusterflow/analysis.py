"""Estimators and verifiers built on recorded trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .forward import GapSequence, literal_step, run_forward
from .laws import GapLaw
from .parallel import map_replicas
from .reverse import (
    ReverseTrajectory,
    WeightSequence,
    laplace_transform,
    mass,
    run_reverse,
    step_distribution,
)
from .rng import RngStream

ALPHA = 1e-3
SE_BAND = 4.0


def mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), float("nan")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass
class EmpiricalDistribution:
    values: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        order = np.argsort(v, kind="stable")
        self.values = v[order]
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()[order]
            if w.shape != v.shape or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("weights must be nonnegative with a positive sum")
            self.weights = w / w.sum()

    @property
    def size(self) -> int:
        return self.values.size

    def cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        if self.weights is None:
            return idx / self.values.size
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[idx]


def _as_empirical(a) -> EmpiricalDistribution:
    return a if isinstance(a, EmpiricalDistribution) else EmpiricalDistribution(a)


def ks_distance(a, b) -> float:
    """Sup-norm distance between two empirical CDFs."""
    a, b = _as_empirical(a), _as_empirical(b)
    grid = np.union1d(a.values, b.values)
    return float(np.max(np.abs(a.cdf(grid) - b.cdf(grid))))


def ks_critical_value(m: int, n: int, alpha: float = ALPHA) -> float:
    """Asymptotic two-sample Kolmogorov-Smirnov critical value."""
    c = math.sqrt(-math.log(alpha / 2) / 2)
    return c * math.sqrt((m + n) / (m * n))


def chi_square_pmf(samples, pmf, kmin: int, min_expected: float = 5.0):
    """Chi-square goodness of fit of integer samples against ``pmf(k)``.

    Cells run from ``kmin`` upward until the expected count drops below
    ``min_expected``; the rest of the tail is pooled into the last cell.
    Returns ``(statistic, p_value, cells)``.
    """
    samples = np.asarray(samples, dtype=np.int64)
    n = samples.size
    if np.any(samples < kmin):
        return float("inf"), 0.0, 0
    k = kmin
    probs = []
    while True:
        p = float(pmf(k))
        if n * p < min_expected and probs:
            break
        probs.append(p)
        k += 1
    kmax = k - 1
    probs[-1] = 1.0 - sum(probs[:-1])
    obs = np.bincount(np.minimum(samples, kmax) - kmin, minlength=len(probs))
    res = stats.chisquare(obs, n * np.asarray(probs))
    return float(res.statistic), float(res.pvalue), len(probs)


def energy_distance(x, y, rng: RngStream | None = None, max_points: int = 2000) -> float:
    """Energy distance between two multivariate samples (rows are points)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x = x[:, None] if x.ndim == 1 else x
    y = y[:, None] if y.ndim == 1 else y
    if rng is not None:
        if x.shape[0] > max_points:
            x = x[rng.gen.choice(x.shape[0], max_points, replace=False)]
        if y.shape[0] > max_points:
            y = y[rng.gen.choice(y.shape[0], max_points, replace=False)]

    def mean_dist(a, b):
        d = a[:, None, :] - b[None, :, :]
        return float(np.sqrt((d * d).sum(-1)).mean())

    return 2 * mean_dist(x, y) - mean_dist(x, x) - mean_dist(y, y)


def inner_product(eta: WeightSequence, gaps) -> float:
    """``sum((3/8)**t * η_i * Γ_i)`` with gap index 0 at the Palm point.

    Indices wrap around the circle; a support wider than the circle is an error.
    """
    g = gaps.gaps if isinstance(gaps, GapSequence) else np.asarray(gaps, dtype=float)
    if len(eta) > g.size:
        raise ValueError(f"support of {len(eta)} indices exceeds {g.size} gaps")
    idx = (eta.offset + np.arange(len(eta))) % g.size
    return float(np.dot(eta.weights.astype(float), g[idx])) * 0.375**eta.t


@dataclass
class DualityReport:
    t: int
    eta0: tuple
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    lhs_replicas: int
    rhs_replicas: int

    @property
    def pooled_se(self) -> float:
        return math.hypot(self.lhs_se, self.rhs_se)

    @property
    def passed(self) -> bool:
        diff = abs(self.lhs - self.rhs)
        if self.pooled_se == 0 or math.isnan(self.pooled_se):
            return diff == 0
        return diff <= SE_BAND * self.pooled_se


def _duality_streams(seed, label, side, r):
    base = RngStream.for_labels(seed, "duality", label, side, r)
    return base.spawn("gaps"), base.spawn("palm"), base.spawn("dynamics")


def duality_lhs(eta0: WeightSequence, law: GapLaw, t: int, replicas: int, seed: int,
                n: int = 1000, label="", side="lhs", threads=None) -> np.ndarray:
    """Per-replica ``<η(0), Γ(t)>`` from forward runs, indexed from a Palm point."""

    def one(r):
        g_rng, p_rng, d_rng = _duality_streams(seed, label, side, r)
        gaps = GapSequence(law.sample(n, g_rng), "theoretical")
        if t > 0:
            gaps = run_forward(gaps, t, "alg1", d_rng, "theoretical", checkpoints=[t]).gaps[t]
        k = int(p_rng.gen.integers(0, len(gaps)))
        return inner_product(eta0, gaps.roll_to(k))

    return np.array(map_replicas(one, replicas, threads))


def duality_rhs(eta0: WeightSequence, law: GapLaw, t: int, replicas: int, seed: int,
                n: int = 1000, label="", side="rhs", threads=None) -> np.ndarray:
    """Per-replica ``<(3/8)**t η(t), Γ(0)>`` from reverse runs against fresh gaps."""

    def one(r):
        g_rng, p_rng, d_rng = _duality_streams(seed, label, side, r)
        gaps = GapSequence(law.sample(n, g_rng), "theoretical")
        k = int(p_rng.gen.integers(0, len(gaps)))
        eta = run_reverse(eta0, t, d_rng).states[-1] if t > 0 else eta0
        return inner_product(eta, gaps.roll_to(k))

    return np.array(map_replicas(one, replicas, threads))


def duality_check(eta0: WeightSequence, law: GapLaw, t: int, replicas, seed: int,
                  n: int = 1000, threads=None) -> DualityReport:
    """Compare both sides of the duality relation by Monte Carlo.

    At ``t = 0`` both sides are the same functional of the initial gaps, so
    they are evaluated on shared draws and must agree exactly.
    """
    if isinstance(replicas, int):
        replicas = (replicas, replicas)
    label = tuple(sorted(eta0.as_dict().items()))
    lhs = duality_lhs(eta0, law, t, replicas[0], seed, n, label, "lhs", threads)
    rhs_side = "lhs" if t == 0 else "rhs"
    rhs = duality_rhs(eta0, law, t, replicas[1], seed, n, label, rhs_side, threads)
    lm, ls = mean_se(lhs)
    rm, rs = mean_se(rhs)
    return DualityReport(t, tuple(eta0.as_dict().items()), lm, ls, rm, rs, lhs.size, rhs.size)


@dataclass
class LemmaResidual:
    """Residuals of ``F_t(x) + α(x) = F_{t+1}(x + β(x))`` on a grid.

    ``boundary`` is ``(3/8)**(t+1) * η̂_k`` at the cell ``k`` holding ``x``:
    the right end of that cell's tuple lands in the next overlap slot, so the
    two sides differ by exactly this amount. ``max_corrected`` is the residual
    once it is accounted for.
    """

    t: int
    x_grid: np.ndarray
    max_abs: float
    max_rel: float
    max_boundary: float
    max_corrected: float
    exact: bool = False


def lemma_grid(eta: WeightSequence, points: int = 1000, exact: bool = False):
    """Grid from 0 to 5% past the last support point of the trimmed sequence."""
    F = step_distribution(eta)
    if exact:
        top = Fraction(3, 4) ** eta.t * len(F) * Fraction(21, 20)
        return [top * Fraction(i, points - 1) for i in range(points)]
    return np.linspace(0.0, 0.75**eta.t * len(F) * 1.05, points)


def _lemma_parts(traj: ReverseTrajectory, t: int):
    if not 0 <= t < len(traj.traces) or t + 1 >= len(traj.states):
        raise ValueError(f"trace for step {t} -> {t + 1} missing")
    eta_t, eta_next = traj.states[t], traj.states[t + 1]
    if eta_t.variant != "gap":
        raise ValueError("the identity is stated for the gap variant")
    first, _ = eta_t.support()
    F0 = step_distribution(eta_t)
    F1 = step_distribution(eta_next)
    rho = traj.traces[t].shifted(first)
    L = len(F0)
    ind = np.zeros(L, dtype=np.int64)
    sel = rho.points[(rho.points >= 0) & (rho.points < L)]
    ind[sel] = 1
    # prefix of η̂_n (3·1[n ∈ ρ] - 1)
    signed = np.cumsum(F0.weights * (3 * ind - 1))
    rho_cum = np.cumsum(ind)
    return F0, F1, signed, rho_cum, L


def lemma_identity_check(traj: ReverseTrajectory, t: int, x_grid=None, exact: bool = False,
                         points: int = 1000) -> LemmaResidual:
    """Evaluate the one-step identity for the step-distribution dynamics.

    ``α(x) = (3/4)**(t+1) (4/3)**t Σ_{n<=k} ΔF_t(n) (1[n∈ρ] - 1/3)`` with
    ``k = floor((4/3)**t x)`` and ``ΔF_t(n)`` the mass at support point ``n``;
    ``β(x) = (3/4)**(t+1) (|ρ ∩ [0, (4/3)**t x]| - (4/3)**t x / 3)``. Sites are
    taken relative to the first nonzero weight. With ``exact=True`` the grid
    must hold Fractions and every quantity is rational.
    """
    F0, F1, signed, rho_cum, L = _lemma_parts(traj, t)
    if x_grid is None:
        x_grid = lemma_grid(traj.states[t], points, exact)
    M1 = mass(traj.states[t + 1])

    if exact:
        scale = Fraction(3, 8) ** t
        worst = worst_rel = worst_b = worst_c = Fraction(0)
        for x in x_grid:
            x = Fraction(x)
            y = x * Fraction(4, 3) ** t
            k = math.floor(y)
            kk = min(k, L - 1)
            alpha = Fraction(1, 4) * scale * int(signed[kk]) if k >= 0 else Fraction(0)
            count = int(rho_cum[kk]) if k >= 0 else 0
            beta = Fraction(3, 4) ** (t + 1) * (count - y / 3)
            lhs = F0.cumulative_exact(x) + alpha
            rhs = F1.cumulative_exact(x + beta)
            boundary = scale * Fraction(3, 8) * int(F0.weights[k]) if 0 <= k < L else Fraction(0)
            r = abs(lhs - rhs)
            worst = max(worst, r)
            worst_b = max(worst_b, boundary)
            worst_c = max(worst_c, abs(lhs - boundary - rhs))
        worst_rel = worst / M1
        return LemmaResidual(t, np.array([float(x) for x in x_grid]), float(worst),
                             float(worst_rel), float(worst_b), float(worst_c), True)

    x = np.asarray(x_grid, dtype=float)
    k = F0.index_of(x)
    kk = np.clip(k, 0, L - 1)
    valid = k >= 0
    scale = 0.375**t
    alpha = np.where(valid, 0.25 * scale * signed[kk], 0.0)
    count = np.where(valid, rho_cum[kk], 0)
    y = x / 0.75**t
    beta = 0.75 ** (t + 1) * (count - y / 3)
    lhs = F0.cumulative(x) + alpha
    rhs = F1.cumulative(x + beta)
    in_support = (k >= 0) & (k < L)
    boundary = np.where(in_support, scale * 0.375 * F0.weights[kk], 0.0)
    r = np.abs(lhs - rhs)
    return LemmaResidual(
        t, x, float(r.max()), float(r.max() / float(M1)), float(boundary.max()),
        float(np.abs(lhs - boundary - rhs).max()), False,
    )


def laplace_split(traj: ReverseTrajectory, t: int, s_grid):
    """``(H_beta, H_alpha, G_{t+1})`` on ``s_grid`` for the step ``t -> t+1``.

    Both pieces integrate ``exp(-s (x + β(x)))``: against ``F_t`` for
    ``H_beta`` and against the signed increments of ``α`` for ``H_alpha``.
    """
    F0, F1, _signed, rho_cum, L = _lemma_parts(traj, t)
    s = np.asarray(s_grid, dtype=float)
    n = np.arange(L)
    ind = np.diff(np.concatenate([[0], rho_cum]))
    z = 0.75 ** (t + 1) * (n + rho_cum)
    kern = np.exp(-np.outer(s, z))
    X = F0.masses
    h_beta = kern @ X
    h_alpha = kern @ (0.75 * X * (ind - 1.0 / 3.0))
    return h_beta, h_alpha, laplace_transform(F1, s)


def laplace_convergence(trajectories, s_grid):
    """Per-``s`` trajectories of the transform and its one-step increments.

    Returns a dict with ``G`` (replica × t × s), ``increment_quantiles``
    (t × s × [0.5, 0.9, 0.99]), and ``split_residual`` (replica × t × s) for
    ``H_beta + H_alpha - G_{t+1}``.
    """
    s = np.asarray(s_grid, dtype=float)
    T = len(trajectories[0].states) - 1
    G = np.array([[laplace_transform(step_distribution(e), s) for e in tr.states]
                  for tr in trajectories])
    inc = np.abs(np.diff(G, axis=1))
    split = np.zeros((len(trajectories), T, s.size))
    bound = np.zeros_like(split)
    for r, tr in enumerate(trajectories):
        for t in range(T):
            hb, ha, g1 = laplace_split(tr, t, s)
            split[r, t] = hb + ha - g1
            bound[r, t] = s * 0.75 ** (t + 1) * float(mass(tr.states[t + 1]))
    return {
        "s": s,
        "G": G,
        "increment_quantiles": np.quantile(inc, [0.5, 0.9, 0.99], axis=0).transpose(1, 2, 0),
        "split_residual": split,
        "split_bound": bound,
    }


def sup_increment(F_a, F_b) -> float:
    """``sup_x |F_a(x) - F_b(x)|`` for two step distributions (jump points suffice)."""
    xs = np.union1d(F_a.support, F_b.support)
    return float(np.max(np.abs(F_a.cumulative(xs) - F_b.cumulative(xs))))


@dataclass
class ClusterRow:
    t: int
    mean: float
    se: float
    passed: bool


@dataclass
class CauchyRow:
    t: int
    lag: int
    value: float
    ci_low: float
    ci_high: float


@dataclass
class ClusterTable:
    means: list = field(default_factory=list)
    cauchy: list = field(default_factory=list)


def cluster_scaling_diagnostic(palm_sizes, lineage_sizes, lag: int = 5, cauchy_times=(5, 10, 15)):
    """Scaled cluster sizes ``(3/4)**t G(t)`` across replicas.

    ``palm_sizes[r, t]`` is the multiplicity of a uniformly chosen point at
    time ``t``; its scaled mean is 1. ``lineage_sizes[r, t]`` follows the
    cluster holding one fixed initial point, which couples the times and
    feeds the Cauchy statistic ``E|Y_t - Y_{t+lag}|^2``.
    """
    palm = np.asarray(palm_sizes, dtype=float)
    lineage = np.asarray(lineage_sizes, dtype=float)
    T = palm.shape[1] - 1
    scale = 0.75 ** np.arange(T + 1)
    table = ClusterTable()
    for t in range(T + 1):
        m, se = mean_se(palm[:, t] * scale[t])
        ok = m == 1.0 if not se > 0 else abs(m - 1.0) <= SE_BAND * se
        table.means.append(ClusterRow(t, m, se, bool(ok)))
    Y = lineage * scale
    for t in cauchy_times:
        if t + lag > T:
            continue
        d = (Y[:, t] - Y[:, t + lag]) ** 2
        m, se = mean_se(d)
        table.cauchy.append(CauchyRow(t, lag, m, m - 1.96 * se, m + 1.96 * se))
    return table


def copula_distance(a, b, grid: int = 20) -> float:
    """Max gap between two empirical copulas of paired samples on a ``grid``²."""

    def cop(pairs):
        u = stats.rankdata(pairs[:, 0]) / pairs.shape[0]
        v = stats.rankdata(pairs[:, 1]) / pairs.shape[0]
        q = np.linspace(0, 1, grid + 1)[1:]
        return np.array([[np.mean((u <= x) & (v <= y)) for y in q] for x in q])

    return float(np.abs(cop(np.asarray(a)) - cop(np.asarray(b))).max())


def joint_convergence(gaps, sizes, grid: int = 20):
    """Dependence between the Palm gap and the Palm point's scaled cluster size.

    ``gaps[r, j]`` and ``sizes[r, j]`` are paired draws at the ``j``-th
    recorded time. Returns per-time Spearman correlations and the copula
    distance between consecutive times; a stabilizing copula is what joint
    convergence would predict. Diagnostic only.
    """
    gaps = np.asarray(gaps, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    rho = [float(stats.spearmanr(gaps[:, j], sizes[:, j]).statistic) for j in range(gaps.shape[1])]
    dist = [
        copula_distance(np.column_stack([gaps[:, j], sizes[:, j]]),
                        np.column_stack([gaps[:, j + 1], sizes[:, j + 1]]), grid)
        for j in range(gaps.shape[1] - 1)
    ]
    return {"spearman": rho, "copula_step": dist}


def pipeline_comparison(law: GapLaw, t: int, n: int, replicas: int, seed: int, threads=None):
    """KS distance between gap marginals of the exact and the row-wise pipelines.

    Both use empirical rescaling; gaps are pooled across replicas. Report only.
    """

    def one(r):
        base = RngStream.for_labels(seed, "pipeline", r)
        g0 = GapSequence(law.sample(n, base.spawn("gaps")), "empirical")
        exact = run_forward(g0, t, "alg1", base.spawn("exact"), "empirical", checkpoints=[t]).gaps[t]
        lit = g0
        lrng = base.spawn("literal")
        for _ in range(t):
            lit = literal_step(lit, lrng, "empirical")
        return exact.gaps, lit.gaps

    out = map_replicas(one, replicas, threads)
    a = np.concatenate([o[0] for o in out])
    b = np.concatenate([o[1] for o in out])
    d = ks_distance(a, b)
    crit = ks_critical_value(a.size, b.size)
    return {
        "t": t,
        "ks": d,
        "critical": crit,
        "within_critical": d <= crit,
        "mean_exact": float(a.mean()),
        "mean_literal": float(b.mean()),
        "n_exact": int(a.size),
        "n_literal": int(b.size),
    }
