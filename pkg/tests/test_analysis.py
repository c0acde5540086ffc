from fractions import Fraction

import numpy as np
import pytest

from clusterflow.analysis import (
    EmpiricalDistribution,
    chi_square_pmf,
    cluster_scaling_diagnostic,
    copula_distance,
    duality_check,
    energy_distance,
    inner_product,
    joint_convergence,
    ks_critical_value,
    ks_distance,
    laplace_convergence,
    laplace_split,
    lemma_identity_check,
    mean_se,
    pipeline_comparison,
    sup_increment,
)
from clusterflow.forward import GapSequence
from clusterflow.laws import EXPONENTIAL, RHO, UNIFORM
from clusterflow.renewal import RenewalTrace
from clusterflow.reverse import WeightSequence, mass, run_reverse, step_distribution


def test_empirical_distribution():
    d = EmpiricalDistribution(np.array([3.0, 1.0, 2.0]))
    assert d.size == 3
    assert d.cdf(np.array([0.5, 1.0, 2.5, 3.0])).tolist() == pytest.approx([0, 1 / 3, 2 / 3, 1])
    w = EmpiricalDistribution(np.array([0.0, 1.0]), np.array([0.25, 0.75]))
    assert w.cdf(0.0) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.array([]))
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.array([np.nan]))


def test_ks_examples(rng):
    x = EXPONENTIAL.sample(1000, rng)
    assert ks_distance(x, x) == 0
    assert ks_distance(np.zeros(5), np.ones(7)) == 1
    a, b = EXPONENTIAL.sample(100_000, rng.spawn(1)), EXPONENTIAL.sample(100_000, rng.spawn(2))
    assert ks_distance(a, b) <= 0.012
    assert ks_critical_value(100_000, 100_000) == pytest.approx(0.0087, abs=1e-4)
    assert ks_distance(a, b) == ks_distance(b, a)


def test_ks_matches_scipy(rng):
    from scipy import stats

    a, b = EXPONENTIAL.sample(500, rng.spawn(1)), UNIFORM.sample(700, rng.spawn(2))
    assert ks_distance(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


def test_chi_square_pmf_rejects_wrong_law(rng):
    x = RHO.sample(20_000, rng)
    assert chi_square_pmf(x, RHO.pmf, 1)[1] > 1e-3
    assert chi_square_pmf(x + 1, RHO.pmf, 1)[1] < 1e-3


def test_energy_distance(rng):
    a = EXPONENTIAL.sample(1000, rng.spawn(1))
    assert energy_distance(a, a, rng) == pytest.approx(0.0, abs=1e-12)
    assert energy_distance(a, a + 3.0, rng) > 1.0


def test_inner_product():
    g = GapSequence(np.array([2.0, 3.0, 4.0, 5.0]))
    assert inner_product(WeightSequence.unit(), g) == 2.0
    eta = WeightSequence(np.array([1, 2, 1]), -1, 1)
    assert inner_product(eta, GapSequence(np.ones(10))) == 1.5
    assert inner_product(eta, GapSequence(3 * np.ones(10))) == 4.5
    with pytest.raises(ValueError):
        inner_product(WeightSequence(np.ones(12, dtype=int)), GapSequence(np.ones(10)))


def test_mean_se():
    m, se = mean_se(np.array([1.0, 3.0]))
    assert m == 2.0 and se == pytest.approx(1.0)


def test_duality_t0_exact():
    for idx in [(0,), (0, 1), (0, 3)]:
        rep = duality_check(WeightSequence.unit(idx), EXPONENTIAL, 0, 500, 3)
        assert rep.lhs == rep.rhs and rep.passed
        assert rep.lhs_se > 0


def test_duality_e0_small(rng):
    rep = duality_check(WeightSequence.unit(), EXPONENTIAL, 2, 2000, 4)
    assert abs(rep.lhs - 1) <= 4 * rep.lhs_se
    assert abs(rep.rhs - 1) <= 4 * rep.rhs_se
    assert rep.passed


def test_lemma_boundary_term_explains_residual(rng):
    tr = run_reverse(WeightSequence.unit(), 6, rng)
    for t in range(6):
        res = lemma_identity_check(tr, t, points=400)
        assert res.max_corrected <= 1e-12
        assert res.max_abs == pytest.approx(res.max_boundary, rel=1e-12)


def test_lemma_exact_origin():
    # t = 0, e_0, x = 0: the identity as stated misses by 3/8 in both cases
    for pts in ([-1, 0, 1], [-1, 1]):
        tr = run_reverse(WeightSequence.unit(), 1, traces=[RenewalTrace((-1, 1), np.array(pts), RHO)])
        res = lemma_identity_check(tr, 0, x_grid=[Fraction(0)], exact=True)
        assert res.max_abs == 0.375 and res.max_corrected == 0


def test_lemma_exact_agrees_with_float(rng):
    tr = run_reverse(WeightSequence.unit(), 4, rng)
    for t in range(3):
        ex = lemma_identity_check(tr, t, exact=True, points=60)
        fl = lemma_identity_check(tr, t, points=60)
        assert ex.max_corrected == 0
        assert fl.max_abs == pytest.approx(ex.max_abs, rel=1e-12)


def test_lemma_needs_trace(rng):
    tr = run_reverse(WeightSequence.unit(), 2, rng)
    with pytest.raises(ValueError):
        lemma_identity_check(tr, 2)


def test_laplace_split_bound_and_s0(rng):
    runs = [run_reverse(WeightSequence.unit(), 8, rng.spawn(r)) for r in range(20)]
    s = np.array([0.0, 0.5, 1.0, 3.0])
    rep = laplace_convergence(runs, s)
    M = np.array([[float(m) for m in tr.ledger.M] for tr in runs])
    assert np.array_equal(rep["G"][:, :, 0], M)
    assert np.all(np.abs(rep["split_residual"]) <= rep["split_bound"] + 1e-12)
    hb, ha, g1 = laplace_split(runs[0], 0, s)
    assert hb[0] + ha[0] == pytest.approx(g1[0])  # s = 0 is the martingale step itself


def test_sup_increment():
    F0 = step_distribution(WeightSequence.unit())
    F1 = step_distribution(WeightSequence(np.array([1, 2, 1]), 0, 1))
    # at x = 0: 1 vs 3/8; beyond 1.5: 1 vs 3/2
    assert sup_increment(F0, F1) == pytest.approx(0.625)
    assert sup_increment(F0, F0) == 0


def test_cluster_diagnostic_shapes():
    palm = np.array([[1, 1, 2], [1, 2, 1], [1, 1, 1], [1, 2, 2]])
    table = cluster_scaling_diagnostic(palm, palm, lag=1, cauchy_times=(0, 1))
    assert table.means[0].mean == 1.0 and table.means[0].passed
    assert [c.t for c in table.cauchy] == [0, 1]


def test_copula_and_joint(rng):
    g = rng.gen
    x = g.random(500)
    a = np.column_stack([x, x])
    b = np.column_stack([x, g.random(500)])
    assert copula_distance(a, a) == 0
    assert copula_distance(a, b) > 0.1
    rep = joint_convergence(np.column_stack([x, x]), np.column_stack([x, -x]))
    assert rep["spearman"] == pytest.approx([1.0, -1.0])
    assert len(rep["copula_step"]) == 1


def test_pipeline_comparison_small():
    rep = pipeline_comparison(EXPONENTIAL, 0, 2000, 1, 9)
    assert rep["ks"] == 0
    rep = pipeline_comparison(EXPONENTIAL, 1, 5000, 2, 9)
    assert rep["mean_exact"] == pytest.approx(1.0)
    assert rep["mean_literal"] == pytest.approx(1.0)
    assert 0 <= rep["ks"] <= 1
