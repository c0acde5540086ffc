from fractions import Fraction

import numpy as np
import pytest

from clusterflow.laws import RHO, TAU
from clusterflow.oracles import (
    enumerate_patterns,
    expected_mass,
    expected_next_mass,
    pattern_probability,
    reachable_states,
)
from clusterflow.renewal import RenewalTrace
from clusterflow.reverse import (
    MAX_STEPS,
    InvariantViolation,
    WeightSequence,
    check_invariants,
    laplace_transform,
    mass,
    reverse_step,
    run_reverse,
    step_distribution,
    sum_squares_scaled,
    trim,
)

E0 = WeightSequence.unit()


def trace(points, window=(-1, 1)):
    return RenewalTrace(window, np.array(points, dtype=np.int64), RHO)


def test_unit_steps():
    a = reverse_step(E0, trace([0]))
    assert a.as_dict() == {0: 1, 1: 2, 2: 1} and a.total == 4 and a.t == 1
    b = reverse_step(E0, trace([]))
    assert b.as_dict() == {0: 1, 1: 1} and b.total == 2
    c = reverse_step(WeightSequence.unit(variant="cluster"), trace([0]))
    assert c.as_dict() == {1: 2, 2: 2} and c.total == 4


def test_step_validation():
    with pytest.raises(ValueError):
        reverse_step(E0, RenewalTrace((-1, 1), np.array([0]), TAU))
    with pytest.raises(ValueError):
        reverse_step(WeightSequence.unit((0, 4)), trace([0]))
    with pytest.raises(ValueError):
        WeightSequence(np.array([1, -1]))
    with pytest.raises(ValueError):
        WeightSequence(np.array([], dtype=int))


def test_mass_after_one_step():
    assert mass(E0) == 1
    assert mass(reverse_step(E0, trace([0]))) == Fraction(3, 2)
    assert mass(reverse_step(E0, trace([]))) == Fraction(3, 4)
    assert Fraction(2, 3) * Fraction(3, 4) + Fraction(1, 3) * Fraction(3, 2) == 1


def test_sum_squares_scaled():
    eta = reverse_step(E0, trace([0]))
    assert sum_squares_scaled(eta) == Fraction(9, 64) * 6


def test_trim_and_step_distribution():
    eta = WeightSequence(np.array([0, 0, 1, 2, 1]), -2, 1)
    assert trim(eta).weights.tolist() == [1, 2, 1]
    assert trim(E0).weights.tolist() == [1]
    F = step_distribution(eta)
    assert F.cumulative_exact(0) == Fraction(3, 8)
    assert F.cumulative_exact(Fraction(3, 4)) == Fraction(9, 8)
    assert F.cumulative_exact(Fraction(3, 2)) == Fraction(3, 2) == F.total_mass == mass(eta)
    assert F.cumulative(np.array([0.0, 0.75, 1.5, 9.0])).tolist() == [0.375, 1.125, 1.5, 1.5]
    assert F.cumulative(-0.1) == 0
    assert step_distribution(E0).total_mass == 1
    cl = reverse_step(WeightSequence.unit(variant="cluster"), trace([0]))
    assert cl.weights[0] == 0 and trim(cl).weights.tolist() == [2, 2]


def test_laplace_transform():
    F = step_distribution(WeightSequence(np.array([1, 2, 1]), 0, 1))
    assert laplace_transform(F, 0.0) == 1.5
    assert laplace_transform(F, 1.0) == pytest.approx(0.375 * (1 + 2 * np.exp(-0.75) + np.exp(-1.5)))
    vals = laplace_transform(F, np.linspace(0, 5, 30))
    assert np.all(np.diff(vals) <= 0)
    with pytest.raises(ValueError):
        laplace_transform(F, -1.0)


def test_run_reverse_bounds(rng):
    for r in range(200):
        tr = run_reverse(E0, 10, rng.spawn(r))
        last = tr.states[-1]
        lo, hi = last.support()
        assert hi - lo + 1 <= 2 * 2**10 + 1
        assert last.weights.max() <= 2**10
        for row in tr.ledger.rows:
            assert row.sum_sq <= Fraction(3, 4) ** row.t * row.M
        assert len(tr.traces) == 10


def test_replay_recorded_traces(rng):
    tr = run_reverse(E0, 8, rng)
    again = run_reverse(E0, 8, traces=tr.traces)
    assert [s.as_dict() for s in tr.states] == [s.as_dict() for s in again.states]


def test_run_reverse_guards(rng):
    with pytest.raises(ValueError):
        run_reverse(E0, MAX_STEPS + 1, rng)
    with pytest.raises(ValueError):
        run_reverse(E0, 3)


def test_invariants_catch_bad_sequences():
    with pytest.raises(InvariantViolation):
        check_invariants(WeightSequence(np.array([3]), 0, 1))  # max 3 > 2**1
    with pytest.raises(InvariantViolation):
        check_invariants(WeightSequence(np.array([1, 0, 0, 0, 0, 1]), 0, 1))  # width 6 > 5
    with pytest.raises(InvariantViolation):
        check_invariants(WeightSequence(np.array([0]), 0, 0))


def test_two_seed_mass_mean(rng):
    eta0 = WeightSequence.unit((0, 5))
    M = np.array([float(run_reverse(eta0, 8, rng.spawn(r)).ledger.M[-1]) for r in range(10_000)])
    assert abs(M.mean() - 2) <= 4 * M.std(ddof=1) / np.sqrt(M.size)


# ----- exact oracles


def test_pattern_probabilities_sum_to_one():
    for lo, hi in [(0, 0), (-1, 1), (-3, 4)]:
        total = sum(p for _, p in enumerate_patterns(lo, hi))
        assert total == 1
    assert pattern_probability([0], 0, 0) == Fraction(1, 3)


def test_exact_martingale_small_t():
    for t in range(4):
        assert expected_mass(E0, t) == 1


def test_exact_conditional_martingale():
    for t in range(3):
        for eta in reachable_states(E0, t):
            assert expected_next_mass(eta) == mass(eta)
    for idx in [(0, 1), (0, 3), (-2, 2)]:
        eta = WeightSequence.unit(idx)
        assert expected_next_mass(eta) == mass(eta) == len(idx)
