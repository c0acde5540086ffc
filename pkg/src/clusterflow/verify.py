"""Acceptance suite: a registry of checks producing JSON verdicts and CSV tables.

Each check group runs at a fixed reference size multiplied by ``scale``.
Verdicts are ``{check, kind, statistic, threshold, pass}``; only ``assert``
verdicts decide the exit status. Nothing time-dependent is written, so two
runs with the same seed produce identical bytes whatever the thread count.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import figures
from .analysis import (
    ALPHA,
    SE_BAND,
    chi_square_pmf,
    cluster_scaling_diagnostic,
    duality_check,
    energy_distance,
    joint_convergence,
    ks_critical_value,
    ks_distance,
    laplace_convergence,
    lemma_identity_check,
    mean_se,
    pipeline_comparison,
    sup_increment,
)
from .export import STEP_HEADER, CsvSink, write_step_distribution
from .forward import (
    GapSequence,
    PointConfiguration,
    forward_step,
    point_step,
    rescale_points,
    run_forward,
    sample_directions,
    tentative_gaps,
)
from .laws import EXPONENTIAL, RHO, TAU, UNIFORM
from .oracles import expected_mass, expected_next_mass, reachable_states
from .parallel import map_replicas
from .renewal import RenewalTrace, sample_stationary_trace
from .reverse import (
    InvariantViolation,
    WeightSequence,
    mass,
    run_reverse,
    step_distribution,
)
from .rng import RngStream

VERDICT_FILE = "verdicts.json"


@dataclass
class Verdict:
    check: str
    kind: str  # assert | report
    statistic: float
    threshold: float | None
    passed: bool
    group: str = ""  # set by run_verify; not part of the JSON record

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "kind": self.kind,
            "statistic": _jsonable(self.statistic),
            "threshold": _jsonable(self.threshold),
            "pass": bool(self.passed),
        }


def _jsonable(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    return v


@dataclass
class Context:
    seed: int
    out: Path
    scale: float = 1.0
    threads: int | None = None
    x_grid_points: int = 1000
    s_grid: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)
    cache: dict = field(default_factory=dict)

    def size(self, reference: int, minimum: int = 2) -> int:
        return max(minimum, int(round(reference * self.scale)))

    def rng(self, *labels) -> RngStream:
        return RngStream.for_labels(self.seed, "verify", *labels)

    def csv(self, name: str, header) -> CsvSink:
        return CsvSink(self.out / name, header)


REGISTRY: list = []


def check_group(name: str):
    def deco(fn):
        REGISTRY.append((name, fn))
        return fn

    return deco


def group_names() -> list:
    return [name for name, _ in REGISTRY]


# ---------------------------------------------------------------- stochastics


@check_group("renewal_laws")
def check_renewal(ctx: Context):
    out = []
    draws = RHO.sample(ctx.size(1_000_000, 1000), ctx.rng("rho-iid"))
    _, p, _ = chi_square_pmf(draws, RHO.pmf, RHO.minimum)
    out.append(Verdict("rho_law_chisq_pvalue", "assert", p, ALPHA, p >= ALPHA))

    # P(0 in trace) for a stationary trace is 1/3
    reps = ctx.size(30_000, 100)
    base = ctx.rng("rho-origin")
    hits = np.array([0 in sample_stationary_trace((-2, 2), RHO, base.spawn(r)).points
                     for r in range(reps)], dtype=float)
    z = abs(hits.mean() - 1 / 3) / math.sqrt((1 / 3) * (2 / 3) / reps)
    out.append(Verdict("rho_origin_occupancy_z", "assert", z, SE_BAND, z <= SE_BAND))
    return out


# ------------------------------------------------------------- martingale


@check_group("martingale_exact")
def check_martingale_exact(ctx: Context):
    eta0 = WeightSequence.unit()
    rows = [(t, expected_mass(eta0, t)) for t in range(4)]
    with ctx.csv("martingale_exact.csv", ["t", "EM_num", "EM_den"]) as sink:
        for t, e in rows:
            sink.row(t, e.numerator, e.denominator)
    worst = max(abs(e - 1) for _, e in rows)
    out = [Verdict("martingale_exact_mean", "assert", float(worst), 0.0, worst == 0)]

    # conditional form on every state reachable within two steps
    gaps = [abs(expected_next_mass(e) - mass(e)) for t in range(3) for e in reachable_states(eta0, t)]
    worst = max(gaps)
    out.append(Verdict("martingale_exact_conditional", "assert", float(worst), 0.0, worst == 0))
    return out


def _martingale_replica(base: RngStream, T: int):
    def one(r):
        try:
            tr = run_reverse(WeightSequence.unit(), T, base.spawn(r))
        except InvariantViolation:
            return None
        return np.array([float(m) for m in tr.ledger.M])

    return one


@check_group("martingale_mc")
def check_martingale_mc(ctx: Context):
    T = 20
    reps = ctx.size(10_000, 20)
    res = map_replicas(_martingale_replica(ctx.rng("martingale"), T), reps, ctx.threads)
    violations = sum(r is None for r in res)
    M = np.array([r for r in res if r is not None])
    inc = np.diff(M, axis=1)
    zs, rows = [], []
    for t in range(T + 1):
        m, se = mean_se(M[:, t])
        z = 0.0 if se == 0 else abs(m - 1.0) / se
        zs.append(z)
        im, ise = mean_se(inc[:, t - 1]) if t > 0 else (0.0, 0.0)
        max_inc = float(np.abs(inc[:, t - 1]).max()) if t > 0 else 0.0
        rows.append((t, m, se, float(M[:, t].var()), z, im, ise, max_inc))
    with ctx.csv("martingale_mc.csv", ["t", "mean_M", "se", "var_M", "z", "mean_increment",
                                       "se_increment", "max_abs_increment"]) as sink:
        sink.rows(rows)
    out = [
        Verdict("martingale_mc_mean_z", "assert", max(zs), SE_BAND, max(zs) <= SE_BAND),
        Verdict("martingale_mc_invariant_violations", "assert", violations, 0, violations == 0),
    ]
    inc_z = max(abs(r[5]) / r[6] for r in rows[1:16] if r[6] > 0)
    out.append(Verdict("martingale_mc_increment_mean_z", "report", inc_z, SE_BAND, inc_z <= SE_BAND))
    # second moment should level off; compare the last ten steps with the first half sample
    var = np.array([r[3] for r in rows])
    half = M[: max(2, M.shape[0] // 2)].var(axis=0)
    drift = float(np.abs(var[10:] - half[10:]).max())
    out.append(Verdict("martingale_second_moment_max", "report", float(var.max()), None, True))
    out.append(Verdict("martingale_second_moment_half_sample_drift", "report", drift, None, True))
    # a.s. convergence proxy: per-step geometric decay of max |M(t+1) - M(t)| over replicas
    ts = np.arange(5, T)
    rate = float(np.exp(np.polyfit(ts, np.log(np.abs(inc[:, ts]).max(axis=0)), 1)[0]))
    out.append(Verdict("martingale_max_increment_decay_rate", "report", rate, math.sqrt(0.75),
                       rate <= math.sqrt(0.75) + 0.05))

    # the cluster variant spreads weight differently but keeps the unit mean
    cbase = ctx.rng("cluster-variant")
    cM = np.array(map_replicas(
        lambda r: [float(m) for m in run_reverse(WeightSequence.unit(variant="cluster"), 12,
                                                 cbase.spawn(r)).ledger.M],
        ctx.size(2000, 20), ctx.threads))
    cz = max(abs(m - 1) / se for m, se in (mean_se(cM[:, t]) for t in range(1, 13)))
    out.append(Verdict("cluster_variant_mean_z", "assert", cz, SE_BAND, cz <= SE_BAND))
    return out


# ------------------------------------------------------------ merge statistics


@check_group("merge_statistics")
def check_merges(ctx: Context):
    n = ctx.size(100_000, 1000)
    rng = ctx.rng("merges")
    gaps = GapSequence(EXPONENTIAL.sample(n, rng.spawn("gaps")), "theoretical")
    dirs = sample_directions(gaps, "alg1", rng.spawn("dirs"))
    _, rec = tentative_gaps(gaps, dirs)
    frac = rec.count / n
    idx = rec.merged_gap_indices
    dist = np.diff(idx)
    _, p, cells = chi_square_pmf(dist, TAU.pmf, TAU.minimum)
    # merge indicators are 1-dependent and adjacent merges exclude each other: Var = n/16
    band = SE_BAND * math.sqrt(n / 16)
    survivors = n - rec.count
    with ctx.csv("merge_distances.csv", ["distance", "observed", "expected"]) as sink:
        counts = np.bincount(dist)
        for k in range(TAU.minimum, counts.size):
            sink.row(k, int(counts[k]), float(TAU.pmf(k)) * dist.size)
    return [
        Verdict("merge_fraction_error", "assert", abs(frac - 0.25), 0.01, abs(frac - 0.25) <= 0.01),
        Verdict("inter_merge_chisq_pvalue", "assert", p, ALPHA, p >= ALPHA),
        Verdict("survivor_count_deviation", "assert", abs(survivors - 0.75 * n), band,
                abs(survivors - 0.75 * n) <= band),
    ]


# ----------------------------------------------------- point / gap equivalence


@check_group("point_gap_equivalence")
def check_equivalence(ctx: Context):
    base = ctx.rng("equivalence")

    def one(r):
        rng = base.spawn(r)
        gaps = GapSequence(EXPONENTIAL.sample(1000, rng.spawn("gaps")), "empirical")
        pts = PointConfiguration.from_gaps(gaps)
        worst, bad_maps = 0.0, 0
        for _ in range(10):
            dirs = sample_directions(gaps, "alg1", rng)
            gaps, _, rec = forward_step(gaps, None, "alg1", rng, dirs=dirs)
            moved, prec = point_step(pts, dirs)
            pts = rescale_points(moved, "empirical")
            pg = pts.gaps()
            worst = max(worst, float(np.max(np.abs(pg - gaps.gaps)) / np.max(np.abs(gaps.gaps))))
            bad_maps += int(not np.array_equal(rec.survivor_map, prec.survivor_map))
        return worst, bad_maps

    res = map_replicas(one, ctx.size(100, 2), ctx.threads)
    worst = max(r[0] for r in res)
    bad = sum(r[1] for r in res)
    return [
        Verdict("point_gap_max_relative_error", "assert", worst, 1e-12, worst <= 1e-12),
        Verdict("point_gap_survivor_map_mismatches", "assert", bad, 0, bad == 0),
    ]


# ------------------------------------------------------------------ gap-law universality


def _forward_arm(ctx, label, law, algorithm, n, T, reps, checkpoints):
    base = ctx.rng("universality", label, algorithm)

    def one(r):
        rng = base.spawn(r)
        g0 = GapSequence(law.sample(n, rng.spawn("gaps")), "empirical")
        tr = run_forward(g0, T, algorithm, rng.spawn("dynamics"), "empirical", checkpoints=checkpoints)
        return {t: tr.gaps[t].gaps for t in checkpoints}

    res = map_replicas(one, reps, ctx.threads)
    pooled = {t: np.concatenate([r[t] for r in res]) for t in checkpoints if t > 0}
    pooled[0] = res[0][0]  # t = 0 is already a large sample from one replica
    return pooled


def _pairs(g):
    return np.column_stack([g[:-1], g[1:]])


@check_group("universality")
def check_universality(ctx: Context):
    # keep about 40 points alive at T even in reduced runs
    n = ctx.size(200_000, 50_000)
    reps = ctx.size(30, 2)
    T = 25
    cps = [0, 20, 25]
    arms = {
        "exponential": _forward_arm(ctx, "exp", EXPONENTIAL, "alg1", n, T, reps, cps),
        "uniform": _forward_arm(ctx, "unif", UNIFORM, "alg1", n, T, reps, cps),
        "exponential_baseline": _forward_arm(ctx, "base", EXPONENTIAL, "alg1", n, T, reps, cps),
    }
    alg2 = {
        "exponential": _forward_arm(ctx, "exp", EXPONENTIAL, "alg2", n, T, reps, [0, T]),
        "uniform": _forward_arm(ctx, "unif", UNIFORM, "alg2", n, T, reps, [0, T]),
    }
    curves = {}
    with ctx.csv("universality_ks.csv", ["algorithm", "t", "ks_exp_unif", "ks_baseline", "n_exp",
                                     "n_unif", "n_baseline"]) as sink:
        for t in cps:
            a, b, c = arms["exponential"][t], arms["uniform"][t], arms["exponential_baseline"][t]
            sink.row("alg1", t, ks_distance(a, b), ks_distance(a, c), a.size, b.size, c.size)
            curves[("alg1", t)] = {k: figures.cdf_on_grid(v[t]) for k, v in arms.items()}
        for t in (0, T):
            a, b = alg2["exponential"][t], alg2["uniform"][t]
            sink.row("alg2", t, ks_distance(a, b), "", a.size, b.size, "")
            curves[("alg2", t)] = {k: figures.cdf_on_grid(v[t]) for k, v in alg2.items()}
    figures.gap_cdf_figure(curves, ctx.out / "gap_cdf.svg")

    ks = {t: (ks_distance(arms["exponential"][t], arms["uniform"][t]),
              ks_distance(arms["exponential"][t], arms["exponential_baseline"][t])) for t in cps}
    r_T = ks[T][0] / ks[T][1]
    r_0 = ks[0][0] / ks[0][1]
    r_20 = ks[20][0] / ks[20][1]
    out = [
        Verdict("universality_ks_ratio_T25", "assert", r_T, 3.0, r_T <= 3.0),
        Verdict("universality_ks_ratio_t0", "assert", r_0, 10.0, r_0 > 10.0),
        Verdict("universality_ks_ratio_T20", "report", r_20, 3.0, r_20 <= 3.0),
    ]
    # adjacent pairs, energy distance relative to the same-law baseline
    erng = ctx.rng("energy")
    e_ab = energy_distance(_pairs(arms["exponential"][T]), _pairs(arms["uniform"][T]), erng.spawn(0))
    e_ac = energy_distance(_pairs(arms["exponential"][T]), _pairs(arms["exponential_baseline"][T]),
                           erng.spawn(1))
    out.append(Verdict("universality_pair_energy_exp_unif", "report", e_ab, None, True))
    out.append(Verdict("universality_pair_energy_baseline", "report", e_ac, None, True))
    a, b = alg2["exponential"][T], alg2["uniform"][T]
    d2 = ks_distance(a, b)
    crit = ks_critical_value(a.size, b.size)
    out.append(Verdict("alg2_ks_exp_unif_T25", "report", d2, crit, d2 > crit))
    return out


# ---------------------------------------------------------------------- lemma


@check_group("lemma")
def check_lemma(ctx: Context):
    T = 12
    reps = ctx.size(100, 2)
    base = ctx.rng("lemma")

    def one(r):
        tr = run_reverse(WeightSequence.unit(), T + 1, base.spawn(r))
        return [lemma_identity_check(tr, t, points=ctx.x_grid_points) for t in range(T + 1)]

    res = map_replicas(one, reps, ctx.threads)
    with ctx.csv("lemma_float.csv", ["replica", "t", "max_abs", "max_rel", "max_boundary",
                                     "max_corrected"]) as sink:
        for r, rows in enumerate(res):
            for x in rows:
                sink.row(r, x.t, x.max_abs, x.max_rel, x.max_boundary, x.max_corrected)
    worst_rel = max(x.max_rel for rows in res for x in rows)
    worst_corr = max(x.max_corrected for rows in res for x in rows)

    exact_reps = ctx.size(20, 1)
    ebase = ctx.rng("lemma-exact")

    def one_exact(r):
        tr = run_reverse(WeightSequence.unit(), 5, ebase.spawn(r))
        return [lemma_identity_check(tr, t, exact=True, points=ctx.x_grid_points) for t in range(5)]

    eres = map_replicas(one_exact, exact_reps, ctx.threads)
    worst_exact = max(x.max_abs for rows in eres for x in rows)
    worst_exact_corr = max(x.max_corrected for rows in eres for x in rows)

    # origin example: t = 0, e_0, x = 0, both outcomes of 0 in rho
    origin = 0.0
    for pts in ([-1, 0, 1], [-1, 1]):
        tr = run_reverse(WeightSequence.unit(), 1,
                         traces=[RenewalTrace((-1, 1), np.array(pts), RHO)])
        origin = max(origin, lemma_identity_check(tr, 0, x_grid=[Fraction(0)], exact=True).max_abs)

    return [
        Verdict("lemma_identity_max_relative", "assert", worst_rel, 1e-9, worst_rel <= 1e-9),
        Verdict("lemma_identity_exact_max_residual", "assert", worst_exact, 0.0, worst_exact == 0),
        Verdict("lemma_identity_origin_residual", "assert", origin, 0.0, origin == 0),
        Verdict("lemma_corrected_max_residual", "assert", worst_corr, 1e-9, worst_corr <= 1e-9),
        Verdict("lemma_corrected_exact_max_residual", "assert", worst_exact_corr, 0.0,
                worst_exact_corr == 0),
    ]


# -------------------------------------------------------------------- duality


DUALITY_ETA0 = ((0,), (0, 1), (0, 3))


@check_group("duality")
def check_duality(ctx: Context):
    reps = ctx.size(10_000, 20)
    seed = int(ctx.rng("duality").stream_id)
    out = []
    with ctx.csv("duality.csv", ["eta0", "t", "lhs", "lhs_se", "rhs", "rhs_se", "replicas"]) as sink:
        for idx in DUALITY_ETA0:
            name = "+".join(f"e{i}" for i in idx)
            for t in range(4):
                rep = duality_check(WeightSequence.unit(idx), EXPONENTIAL, t, reps, seed,
                                    threads=ctx.threads)
                sink.row(name, t, rep.lhs, rep.lhs_se, rep.rhs, rep.rhs_se, reps)
                diff = abs(rep.lhs - rep.rhs)
                if t == 0:
                    out.append(Verdict(f"duality_{name}_t0_difference", "assert", diff, 0.0, diff == 0))
                else:
                    z = diff / rep.pooled_se
                    out.append(Verdict(f"duality_{name}_t{t}_z", "assert", z, SE_BAND, z <= SE_BAND))
    return out


# ------------------------------------------------------------ cluster scaling


@check_group("cluster_scaling")
def check_cluster(ctx: Context):
    T = 20
    n = ctx.size(100_000, 40_000)
    reps = ctx.size(1000, 4)
    base = ctx.rng("cluster")

    def one(r):
        rng = base.spawn(r)
        g0 = GapSequence(EXPONENTIAL.sample(n, rng.spawn("gaps")), "theoretical")
        tr = run_forward(g0, T, "alg1", rng.spawn("dynamics"), "theoretical")
        prng = rng.spawn("palm")
        sizes, gaps = [], []
        for t in range(T + 1):
            k = int(prng.gen.integers(0, tr.counts[t]))
            sizes.append(int(tr.multiplicity[t][k]))
            gaps.append(float(tr.gaps[t].gaps[k]))
        return sizes, gaps, tr.lineage

    res = map_replicas(one, reps, ctx.threads)
    palm = np.array([r[0] for r in res])
    gaps = np.array([r[1] for r in res])
    lineage = np.array([r[2] for r in res])
    table = cluster_scaling_diagnostic(palm, lineage)
    scaled = palm * 0.75 ** np.arange(T + 1)
    joint_times = [5, 10, 15, 20]
    joint = joint_convergence(gaps[:, joint_times], scaled[:, joint_times])
    with ctx.csv("cluster_scaling.csv", ["t", "mean", "se", "var", "pass"]) as sink:
        for row in table.means:
            sink.row(row.t, row.mean, row.se, float(scaled[:, row.t].var()), int(row.passed))
    with ctx.csv("cluster_cauchy.csv", ["t", "lag", "value", "ci_low", "ci_high"]) as sink:
        for c in table.cauchy:
            sink.row(c.t, c.lag, c.value, c.ci_low, c.ci_high)
    with ctx.csv("joint_convergence.csv", ["t", "spearman", "copula_step_to_next"]) as sink:
        for j, t in enumerate(joint_times):
            step = joint["copula_step"][j] if j < len(joint["copula_step"]) else ""
            sink.row(t, joint["spearman"][j], step)

    # the same statistic on the dual coupling: cluster-variant mass along reverse runs
    dbase = ctx.rng("cluster-dual")
    dual = np.array(map_replicas(
        lambda r: [float(m) for m in run_reverse(WeightSequence.unit(variant="cluster"), T,
                                                 dbase.spawn(r)).ledger.M],
        reps, ctx.threads))
    dual_rows = []
    for t in (5, 10, 15):
        m, se = mean_se((dual[:, t] - dual[:, t + 5]) ** 2)
        dual_rows.append((t, 5, m, m - 1.96 * se, m + 1.96 * se))
    with ctx.csv("cluster_cauchy_dual.csv", ["t", "lag", "value", "ci_low", "ci_high"]) as sink:
        sink.rows(dual_rows)

    zmax = max(0.0 if r.se == 0 else abs(r.mean - 1) / r.se for r in table.means)
    vals = [c.value for c in table.cauchy]
    ratio = max(b / a for a, b in zip(vals, vals[1:]))
    dvals = [r[2] for r in dual_rows]
    dratio = max(b / a for a, b in zip(dvals, dvals[1:]))
    return [
        Verdict("cluster_mean_max_z", "assert", zmax, SE_BAND, zmax <= SE_BAND),
        Verdict("cluster_t0_size", "assert", float(palm[:, 0].max()), 1.0, bool(np.all(palm[:, 0] == 1))),
        Verdict("cluster_cauchy_max_ratio", "report", ratio, 1.0, ratio < 1.0),
        Verdict("cluster_dual_cauchy_max_ratio", "report", dratio, 1.0, dratio < 1.0),
        Verdict("joint_copula_last_step", "report", joint["copula_step"][-1], None, True),
    ]


# ------------------------------------------------ step increments and transforms


def _reverse_runs(ctx: Context, T=20):
    key = ("reverse-runs", T)
    if key not in ctx.cache:
        base = ctx.rng("step_increments")
        ctx.cache[key] = map_replicas(lambda r: run_reverse(WeightSequence.unit(), T, base.spawn(r)),
                                      ctx.size(1000, 4), ctx.threads)
    return ctx.cache[key]


def _nonincreasing_tail(traj, start=10):
    Fs = [step_distribution(e) for e in traj.states]
    d = [sup_increment(Fs[t], Fs[t + 1]) for t in range(len(Fs) - 1)]
    return all(d[t + 1] <= d[t] for t in range(start, len(d) - 1)), d


@check_group("step_increments")
def check_step_increments(ctx: Context):
    T = 20
    runs = _reverse_runs(ctx, T)
    flags = []
    with ctx.csv("step_increments.csv", ["replica", "t", "sup_increment"]) as sink:
        for r, tr in enumerate(runs):
            ok, d = _nonincreasing_tail(tr)
            flags.append(ok)
            for t, v in enumerate(d):
                sink.row(r, t, v)
    frac = float(np.mean(flags))

    # two independent panels
    base = ctx.rng("step-panels")
    panels = [run_reverse(WeightSequence.unit(), T, base.spawn(i)) for i in range(2)]
    with ctx.csv("step_panels.csv", STEP_HEADER) as sink:
        for i, tr in enumerate(panels):
            for eta in tr.states:
                write_step_distribution(sink, i, eta)
    svg = figures.step_panels_figure(panels, list(range(0, T + 1, 2)), ctx.out / "step_functions.svg")
    emitted = svg.exists() and svg.with_suffix(".csv").exists()
    return [
        Verdict("step_increments_panels_emitted", "assert", float(emitted), 1.0, emitted),
        Verdict("step_increments_nonincreasing_fraction", "report", frac, 0.9, frac >= 0.9),
    ]


@check_group("laplace")
def check_laplace(ctx: Context):
    runs = _reverse_runs(ctx, 20)
    s = np.asarray(ctx.s_grid, dtype=float)
    rep = laplace_convergence(runs, s)
    G = rep["G"]
    M = np.array([[float(m) for m in tr.ledger.M] for tr in runs])
    out = []
    if np.any(s == 0):
        d0 = float(np.abs(G[:, :, int(np.flatnonzero(s == 0)[0])] - M).max())
        out.append(Verdict("laplace_s0_equals_mass", "assert", d0, 0.0, d0 == 0))
    q = rep["increment_quantiles"]
    with ctx.csv("laplace_increments.csv", ["t", "s", "q50", "q90", "q99"]) as sink:
        for t in range(q.shape[0]):
            for j, sv in enumerate(s):
                sink.row(t, float(sv), *q[t, j].tolist())
    if np.any(s == 1.0):
        j = int(np.flatnonzero(s == 1.0)[0])
        med = q[:, j, 0]
        frac = float(np.mean(np.diff(med) < 0))
        out.append(Verdict("laplace_median_increment_decreasing_fraction", "report", frac, 1.0, frac == 1.0))
    resid = np.abs(rep["split_residual"])
    rel = float((resid / np.maximum(G[:, 1:, :], 1e-300)).max())
    over = float((resid - rep["split_bound"]).max())
    out.append(Verdict("laplace_split_relative_residual", "report", rel, 1e-9, rel <= 1e-9))
    out.append(Verdict("laplace_split_within_displacement_bound", "assert", over, 1e-12, over <= 1e-12))
    return out


# ------------------------------------------------------------------ pipelines


@check_group("pipeline_comparison")
def check_pipeline(ctx: Context):
    seed = int(ctx.rng("pipeline").stream_id)
    rep = pipeline_comparison(EXPONENTIAL, 1, ctx.size(100_000, 2000), 1, seed, ctx.threads)
    zero = pipeline_comparison(EXPONENTIAL, 0, ctx.size(10_000, 200), 1, seed, ctx.threads)
    with ctx.csv("pipeline_comparison.csv", list(rep)) as sink:
        sink.row(*rep.values())
        sink.row(*zero.values())
    return [
        Verdict("pipeline_ks_t1", "report", rep["ks"], rep["critical"], rep["within_critical"]),
        Verdict("pipeline_ks_t0", "assert", zero["ks"], 0.0, zero["ks"] == 0),
        Verdict("pipeline_literal_mean_gap", "report", rep["mean_literal"], 1.0,
                abs(rep["mean_literal"] - 1) < 1e-9),
    ]


# ------------------------------------------------------------------- runner


def select_groups(filter_: str | None):
    if not filter_:
        return list(REGISTRY)
    return [(n, f) for n, f in REGISTRY if filter_ in n]


def run_verify(seed: int, out, scale: float = 1.0, threads=None, filter_=None,
               x_grid_points: int = 1000, s_grid=(0.0, 0.5, 1.0, 2.0, 4.0), progress=None):
    """Run the selected groups; write CSVs and ``verdicts.json`` into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(seed, out, scale, threads, x_grid_points, tuple(s_grid))
    groups = select_groups(filter_)
    if not groups:
        raise ValueError(f"no check group matches {filter_!r}; groups: {', '.join(group_names())}")
    verdicts = []
    for name, fn in groups:
        if progress:
            progress(name)
        for v in fn(ctx):
            v.group = name
            verdicts.append(v)
    doc = {
        "seed": seed,
        "scale": scale,
        "groups": [n for n, _ in groups],
        "verdicts": [v.to_dict() for v in verdicts],
    }
    (out / VERDICT_FILE).write_text(json.dumps(doc, indent=2) + "\n")
    return verdicts


def all_asserts_pass(verdicts) -> bool:
    return all(v.passed for v in verdicts if v.kind == "assert")
