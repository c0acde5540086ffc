"""Property-based checks over random small inputs."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterflow import kernels
from clusterflow.analysis import ks_distance
from clusterflow.kernels import _fallback
from clusterflow.reverse import WeightSequence, check_invariants, reverse_step
from clusterflow.renewal import RenewalTrace
from clusterflow.laws import RHO

try:
    from clusterflow.kernels import _core
except ImportError:  # extension not built
    _core = None

SETTINGS = settings(max_examples=200, deadline=None)

gap_arrays = st.lists(st.floats(0.01, 10.0, allow_nan=False), min_size=2, max_size=40)


@st.composite
def gaps_and_coins(draw):
    g = draw(gap_arrays)
    right = draw(st.lists(st.booleans(), min_size=len(g), max_size=len(g)))
    return np.array(g), np.array(right)


@st.composite
def weights_and_sites(draw):
    w = draw(st.lists(st.integers(0, 50), min_size=1, max_size=12))
    if sum(w) == 0:
        w[0] = 1
    offset = draw(st.integers(-6, 6))
    lo = min(offset, 0) - 1
    hi = max(offset + len(w) - 1, 0) + 1
    sites = sorted(draw(st.sets(st.integers(lo, hi))))
    return np.array(w, dtype=np.int64), offset, RenewalTrace((lo, hi), np.array(sites, dtype=np.int64), RHO)


@SETTINGS
@given(gaps_and_coins())
def test_step_conserves_length_and_multiplicity(case):
    g, right = case
    tent, merged = kernels.tentative_gaps(g, right)
    assert tent.sum() == pytest.approx(g.sum(), rel=1e-12)
    assert np.all(tent[merged] == 0)
    mult = np.ones(g.size, dtype=np.int64)
    new, m, survivor = kernels.fold(tent, merged, mult)
    assert m.sum() == g.size
    assert new.size == g.size - merged.sum() == m.size
    assert np.all(np.diff(survivor[:-1]) >= 0)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
@SETTINGS
@given(gaps_and_coins(), weights_and_sites(), st.booleans())
def test_backends_agree(case, wcase, cluster):
    g, right = case
    a, ma = _fallback.tentative_gaps(g, right)
    b, mb = _core.tentative_gaps(g, right)
    assert np.array_equal(a, np.asarray(b)) and np.array_equal(ma, np.asarray(mb))
    w, offset, trace = wcase
    ea = _fallback.reverse_expand(w, offset, trace.mask(), trace.lo, cluster)
    eb = _core.reverse_expand(w, offset, trace.mask(), trace.lo, cluster)
    assert np.array_equal(ea[0], np.asarray(eb[0])) and ea[1] == eb[1]


@SETTINGS
@given(weights_and_sites(), st.sampled_from(["gap", "cluster"]))
def test_reverse_step_total_weight(wcase, variant):
    w, offset, trace = wcase
    eta = WeightSequence(w, offset, 0, variant)
    new = reverse_step(eta, trace)
    idx = offset + np.arange(w.size)
    factor = 2 + 2 * np.isin(idx, trace.points)
    assert new.total == int(np.sum(factor * w))
    assert new.t == 1


@SETTINGS
@given(st.lists(st.integers(0, 2**40), min_size=1, max_size=30))
def test_sum_squares_exact(ws):
    assert kernels.sum_squares_exact(np.array(ws, dtype=np.int64)) == sum(x * x for x in ws)


@SETTINGS
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30),
       st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_ks_symmetric_and_bounded(a, b):
    d = ks_distance(a, b)
    assert d == ks_distance(b, a)
    assert 0.0 <= d <= 1.0
    assert ks_distance(a, a) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_gap_variant_bounds_along_paths(data):
    eta = WeightSequence.unit()
    for _ in range(data.draw(st.integers(1, 8))):
        lo, hi = eta.rho_window(slack=0)
        sites = sorted(data.draw(st.sets(st.integers(lo, hi))))
        eta = reverse_step(eta, RenewalTrace((lo, hi), np.array(sites, dtype=np.int64), RHO))
        check_invariants(eta)
