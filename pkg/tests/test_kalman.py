import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posettrack import KalmanParams, KalmanState, ValidationError, kalman_track, predict, update
from posettrack.kalman import _LiveTrack, _scan_distances, mahalanobis

from conftest import make_dataset


def state(pos=(0, 0, 0), vel=(0, 0, 0), cov=None, t=0.0):
    cov = np.eye(6) if cov is None else cov
    return KalmanState(np.array([*pos, *vel], dtype=float), np.array(cov, dtype=float), t)


def test_predict_constant_velocity():
    s = predict(state(vel=(1, 0, 0)), 1.0)
    assert s.mean[:3].tolist() == [1.0, 0.0, 0.0]
    assert s.last_t == 1.0


def test_predict_zero_dt_is_identity():
    s0 = state(vel=(3, 2, 1))
    s1 = predict(s0, 0.0, q=5.0)
    assert np.array_equal(s1.mean, s0.mean) and np.array_equal(s1.cov, s0.cov)


def test_predict_cov_identity_dt2():
    # F F' per axis: [[1,2],[0,1]] @ [[1,0],[2,1]] = [[5,2],[2,1]]
    expected = np.zeros((6, 6))
    for ax in range(3):
        expected[ax, ax] = 5.0
        expected[ax, ax + 3] = expected[ax + 3, ax] = 2.0
        expected[ax + 3, ax + 3] = 1.0
    s = predict(state(), 2.0, q=0.0)
    assert np.array_equal(s.cov, expected)


def test_predict_process_noise_block():
    # with zero prior covariance only Q remains: q*[[dt^3/3, dt^2/2],[dt^2/2, dt]]
    s = predict(state(cov=np.zeros((6, 6))), 3.0, q=2.0)
    assert s.cov[0, 0] == pytest.approx(18.0)
    assert s.cov[0, 3] == pytest.approx(9.0)
    assert s.cov[3, 3] == pytest.approx(6.0)
    assert s.cov[0, 1] == 0.0


def test_predict_backwards_rejected():
    with pytest.raises(ValidationError):
        predict(state(t=5.0), 4.0)


def test_update_zero_innovation_keeps_mean():
    s = state(pos=(10, -3, 2), vel=(1, 1, 1), cov=np.eye(6) * 4)
    post = update(s, (10, -3, 2), KalmanParams(r_pos=1.0))
    assert np.allclose(post.mean, s.mean, atol=0)


def test_update_large_measurement_noise_changes_little():
    s = state(cov=np.eye(6) * 100)
    small = update(s, (50, 0, 0), 1.0).mean[0]
    tiny = update(s, (50, 0, 0), 1e6).mean[0]
    assert abs(tiny) < abs(small) * 1e-3


@pytest.mark.parametrize("p,r", [(4.0, 1.0), (1e4, 25.0), (0.3, 7.0)])
def test_update_scalar_posterior(p, r):
    cov = np.diag([p, p, p, 1.0, 1.0, 1.0])
    post = update(state(cov=cov), (1.0, 2.0, 3.0), r)
    assert post.cov[0, 0] == pytest.approx(p * r / (p + r), rel=1e-12)
    # the measurement pulls the mean by the gain p / (p + r)
    assert post.mean[0] == pytest.approx(p / (p + r), rel=1e-12)


def test_update_singular_innovation():
    with pytest.raises(np.linalg.LinAlgError, match="singular"):
        update(state(cov=np.zeros((6, 6))), (1, 0, 0), 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_covariance_stays_symmetric_psd(seed):
    rng = np.random.default_rng(seed)
    params = KalmanParams(q=rng.uniform(0.01, 10), r_pos=rng.uniform(1, 1e4))
    s = KalmanState.initial(rng.normal(size=3) * 1e3, 0.0, params)
    t = 0.0
    for _ in range(20):
        t += rng.uniform(0, 60)
        s = predict(s, t, params.q)
        s = update(s, rng.normal(size=3) * 1e3, params)
        assert np.array_equal(s.cov, s.cov.T)
        assert np.linalg.eigvalsh(s.cov).min() >= -1e-8 * np.trace(s.cov)


def test_batched_distances_match_scalar():
    rng = np.random.default_rng(4)
    params = KalmanParams(q=3.0)
    live = []
    for k in range(4):
        st_ = KalmanState.initial(rng.normal(size=3) * 500, rng.uniform(0, 5), params)
        st_ = update(predict(st_, 6.0, params.q), rng.normal(size=3) * 500, params)
        live.append(_LiveTrack(k, st_, []))
    z = rng.normal(size=(3, 3)) * 800
    batch = _scan_distances(live, 20.0, z, params)
    for a, tr in enumerate(live):
        for b in range(3):
            expected = mahalanobis(predict(tr.state, 20.0, params.q), z[b], params.r_pos)
            assert batch[a, b] == pytest.approx(expected, rel=1e-9)


# --- multi-target baseline -------------------------------------------------


def line(tid, n, y0=0.0, dt=10.0, v=200.0):
    return [(k * dt, v * k * dt, y0, 0.0, tid) for k in range(n)]


def test_single_target_one_track():
    ds = make_dataset(line("a", 10))
    tracks = kalman_track(ds, KalmanParams())
    assert len(tracks) == 1 and len(tracks[0]) == 10


def test_parallel_targets_stay_pure():
    ds = make_dataset(line("a", 12) + line("b", 12, y0=10e3))
    tracks = kalman_track(ds, KalmanParams(gate=3.0))
    assert len(tracks) == 2
    for tr in tracks:
        ids = {ds[ds.position_of[m]].truth_id for m in tr.members}
        assert len(ids) == 1 and len(tr) == 12


def test_stale_gap_splits_track():
    params = KalmanParams(stale_after=100.0)
    rows = [(t, 0.0, 0.0, 0.0, "a") for t in (0, 10, 20, 30)]
    rows += [(t, 0.0, 0.0, 0.0, "a") for t in (230, 240, 250)]  # gap of 200 s
    tracks = kalman_track(make_dataset(rows), params)
    assert [len(t) for t in tracks] == [4, 3]


def test_tracks_disjoint_and_time_ordered():
    rng = np.random.default_rng(0)
    rows = [(float(t), *rng.uniform(0, 20e3, 2), 0.0, "x") for t in rng.integers(0, 50, 60) * 10]
    ds = make_dataset(rows)
    tracks = kalman_track(ds, KalmanParams())
    members = [m for tr in tracks for m in tr.members]
    assert sorted(members) == list(range(len(ds)))
    for tr in tracks:
        ds.check_track(tr)


def test_kalman_params_validate():
    with pytest.raises(ValidationError):
        KalmanParams(q=0.0)
