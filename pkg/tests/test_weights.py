import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posettrack import (
    ComponentStats,
    Detection,
    KalmanParams,
    ValidationError,
    component_stats,
    observe,
    simple_weight,
    tailored_weight,
)
from posettrack.poset import ObsArrays
from posettrack.weights import edge_components, tailored_weights


def ob(t, pos, vel=None):
    return observe(Detection(0, t, pos, vel))


def test_simple_weight_examples():
    assert simple_weight(ob(0, (1, 2, 3)), ob(5, (1, 2, 3))) == 0.0
    assert simple_weight(ob(0, (0, 0, 0)), ob(5, (3e3, 4e3, 0))) == 5000.0
    assert simple_weight(ob(0, (0, 0, 0)), ob(5, (0, 0, 200))) == 200.0


def test_simple_weight_symmetric():
    a, b = ob(0, (10, -4, 7)), ob(3, (-2, 8, 1))
    assert simple_weight(a, b) == simple_weight(b, a)


def arrays(rows):
    return ObsArrays.from_observations([ob(*r) for r in rows])


def test_pure_time_offset_zero_kinematic_terms():
    arr = arrays([(0, (0, 0, 0), (100, 50, 0)), (30, (0, 0, 0), (100, 50, 0))])
    comps = edge_components(arr, np.array([0]), np.array([1]))[0]
    assert comps[0] == comps[1] == comps[3] == comps[4] == 0.0
    assert comps[2] == 30.0
    # forward projection lands 30 s * |v| away from b
    assert comps[5] == pytest.approx(30 * math.hypot(100, 50))


def test_heading_difference_wraps():
    d = math.radians
    va = (math.cos(d(350)), math.sin(d(350)), 0)
    vb = (math.cos(d(10)), math.sin(d(10)), 0)
    arr = arrays([(0, (0, 0, 0), va), (1, (0, 0, 0), vb)])
    assert edge_components(arr, np.array([0]), np.array([1]))[0, 3] == pytest.approx(d(20))


def test_missing_velocity_marks_terms():
    arr = arrays([(0, (0, 0, 0), None), (1, (5, 0, 0), (1, 0, 0))])
    comps = edge_components(arr, np.array([0]), np.array([1]))[0]
    assert np.isnan(comps[3:]).all()
    assert comps[0] == 5.0


def test_single_max_component_gives_one():
    # edge 0: max horizontal, min vertical and time; edge 1 the opposite
    arr = arrays([(0, (0, 0, 0)), (10, (1000, 0, 0)), (20, (0, 0, 100))])
    w = tailored_weights(arr, np.array([0, 0]), np.array([1, 2]))
    assert w.tolist() == [1.0, 2.0]


def test_single_edge_population_weight_zero():
    arr = arrays([(0, (0, 0, 0), (1, 0, 0)), (10, (1000, 30, 5), (0, 2, 0))])
    assert tailored_weights(arr, np.array([0]), np.array([1])).tolist() == [0.0]


def test_component_stats_examples():
    arr = arrays([(0, (0, 0, 0)), (10, (100, 0, 0)), (20, (300, 0, 0))])
    one = component_stats(arr, [0], [1])
    assert np.array_equal(one.lo, one.hi)
    two = component_stats(arr, [0, 0], [1, 2])
    assert (two.lo[0], two.hi[0]) == (100.0, 300.0)
    rev = component_stats(arr, [0, 0], [2, 1])
    assert np.array_equal(two.lo, rev.lo) and np.array_equal(two.hi, rev.hi)
    with pytest.raises(ValidationError):
        component_stats(np.zeros((0, 6)))


def test_scalar_tailored_matches_population():
    rng = np.random.default_rng(2)
    rows = [
        (float(t), tuple(rng.normal(size=3) * 1e3), tuple(rng.normal(size=3) * 100))
        for t in sorted(rng.uniform(0, 100, 6))
    ]
    obs = [ob(*r) for r in rows]
    arr = ObsArrays.from_observations(obs)
    src, dst = np.triu_indices(6, 1)
    stats = component_stats(arr, src, dst)
    batch = tailored_weights(arr, src, dst)
    kp = KalmanParams()
    for s, d, w in zip(src, dst, batch):
        assert tailored_weight(obs[s], obs[d], stats, kp) == pytest.approx(w, abs=1e-12)


def test_mixing_coefficients():
    arr = arrays([(0, (0, 0, 0)), (10, (1000, 0, 0)), (20, (0, 0, 100))])
    w = tailored_weights(arr, np.array([0, 0]), np.array([1, 2]), mix=[2, 0, 0, 1, 1, 1])
    assert w.tolist() == [2.0, 0.0]
    with pytest.raises(ValidationError):
        tailored_weights(arr, np.array([0]), np.array([1]), mix=[1, 1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_tailored_in_range(seed):
    rng = np.random.default_rng(seed)
    n = 8
    rows = []
    for k, t in enumerate(np.sort(rng.uniform(0, 300, n))):
        vel = None if rng.uniform() < 0.3 else tuple(rng.normal(size=3) * 100)
        rows.append((float(t), tuple(rng.normal(size=3) * 1e4), vel))
    arr = arrays(rows)
    src, dst = np.triu_indices(n, 1)
    w = tailored_weights(arr, src, dst)
    assert np.all(w >= 0) and np.all(w <= 6)


def test_normalize_degenerate_span():
    stats = ComponentStats(np.full(6, 2.0), np.full(6, 2.0))
    assert stats.normalize(np.full((1, 6), 2.0)).tolist() == [[0.0] * 6]
