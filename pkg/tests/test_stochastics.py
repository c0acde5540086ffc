from fractions import Fraction

import numpy as np
import pytest

from clusterflow.laws import (
    DETERMINISTIC,
    EXPONENTIAL,
    RHO,
    TAU,
    UNIFORM,
    GapLaw,
    sample_gaps,
    sample_renewal_gap,
)
from clusterflow.renewal import RenewalTrace, counting_function, sample_stationary_trace
from clusterflow.rng import RngStream, derive_stream_id


# ----- streams


def test_streams_reproducible_and_independent_of_order():
    a = RngStream.for_labels(7, "x", 3).gen.random(5)
    RngStream.for_labels(7, "y").gen.random(100)
    b = RngStream.for_labels(7, "x", 3).gen.random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RngStream.for_labels(8, "x", 3).gen.random(5))


def test_spawn_depends_only_on_identity():
    parent = RngStream(1, 99)
    parent.gen.random(10)  # consuming the parent does not move children
    assert np.array_equal(parent.spawn("a").gen.random(3), RngStream(1, 99).spawn("a").gen.random(3))
    assert derive_stream_id("a", 1) != derive_stream_id("a", 2)


# ----- gap laws


def test_deterministic_gaps():
    assert sample_gaps(4, DETERMINISTIC, RngStream(0)).gaps.tolist() == [1, 1, 1, 1]


def test_exponential_mean(rng):
    g = sample_gaps(100_000, EXPONENTIAL, rng).gaps
    assert abs(g.mean() - 1) <= 4 / np.sqrt(g.size)


def test_uniform_variance(rng):
    g = sample_gaps(100_000, UNIFORM, rng).gaps
    assert abs(g.var() - 1 / 3) <= 0.02


def test_gamma_law_and_errors(rng):
    law = GapLaw("gamma", 4.0)
    g = law.sample(50_000, rng)
    assert abs(g.mean() - 1) < 0.02 and abs(g.var() - 0.25) < 0.02
    assert GapLaw.from_dict(law.to_dict()) == law
    with pytest.raises(ValueError):
        GapLaw("cauchy")
    with pytest.raises(ValueError):
        sample_gaps(1, EXPONENTIAL, rng)
    with pytest.raises(TypeError):
        sample_gaps(10, "exponential", rng)


# ----- renewal laws


def test_rho_pmf_values():
    assert [RHO.pmf(k) for k in (1, 2, 3)] == [Fraction(1, 4), Fraction(1, 4), Fraction(3, 16)]
    assert RHO.pmf(0) == 0


def test_pmf_matches_geometric_convolution():
    for k in range(2, 30):
        conv = sum(Fraction(1, 2**a) * Fraction(1, 2 ** (k - a)) for a in range(1, k))
        assert TAU.pmf(k) == conv
        assert RHO.pmf(k - 1) == conv


def test_survival_and_delay_are_consistent():
    for law in (TAU, RHO):
        for j in range(0, 20):
            assert law.survival(j) == 1 - sum((law.pmf(k) for k in range(j + 1)), Fraction(0))
        assert sum((law.delay_pmf(j) for j in range(200)), Fraction(0)) > 1 - Fraction(1, 2**150)
    assert RHO.delay_pmf(0) == Fraction(1, 3)
    assert TAU.delay_pmf(0) == Fraction(1, 4)


def test_rho_empirical_mean(rng):
    x = RHO.sample(1_000_000, rng)
    assert abs(x.mean() - 3) <= 0.01
    assert x.min() >= 1


def test_tau_minimum(rng):
    assert TAU.sample(100_000, rng).min() == 2
    assert sample_renewal_gap(TAU, rng) >= 2


# ----- traces


@pytest.mark.parametrize("law,length,density", [(RHO, 300_000, 1 / 3), (TAU, 400_000, 1 / 4)])
def test_stationary_density(law, length, density, rng):
    tr = sample_stationary_trace((-length // 2, length - length // 2 - 1), law, rng)
    assert abs(tr.points.size / len(tr) - density) <= 0.005


def test_stationary_origin_probability(rng):
    hits = [0 in sample_stationary_trace((0, 0), RHO, rng.spawn(r)).points for r in range(30_000)]
    p = np.mean(hits)
    assert abs(p - 1 / 3) <= 4 * np.sqrt(2 / 9 / len(hits))


def test_stationary_gaps_follow_law(rng):
    from clusterflow.analysis import chi_square_pmf

    tr = sample_stationary_trace((0, 600_000), RHO, rng)
    _, p, _ = chi_square_pmf(np.diff(tr.points), RHO.pmf, 1)
    assert p >= 1e-3


def test_trace_validation():
    with pytest.raises(ValueError):
        RenewalTrace((0, 5), np.array([3, 2]), RHO)
    with pytest.raises(ValueError):
        RenewalTrace((0, 5), np.array([6]), RHO)
    with pytest.raises(ValueError):
        RenewalTrace((3, 2), np.array([]), RHO)
    tr = RenewalTrace((-3, 3), np.array([-2, 1, 3]), RHO)
    assert tr.count_in(-3, 3) == 3 and tr.count_in(2, 1) == 0
    assert tr.shifted(1).points.tolist() == [-3, 0, 2]


@pytest.mark.parametrize("points,i,expected", [([-2, 1, 3], 2, 0), ([], 4, 0), ([0], 5, 1)])
def test_counting_function(points, i, expected):
    assert counting_function(RenewalTrace((-6, 6), np.array(points, dtype=int), RHO), i) == expected


def test_counting_function_needs_coverage():
    with pytest.raises(ValueError):
        counting_function(RenewalTrace((0, 6), np.array([1]), RHO), 2)
