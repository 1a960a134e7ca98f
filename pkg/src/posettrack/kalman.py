"""Constant-velocity Kalman filter and a nearest-neighbour multi-target baseline.

State layout is ``[x, y, z, vx, vy, vz]``; measurements are positions only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import get_float
from .model import Dataset, Track, ValidationError

H = np.hstack([np.eye(3), np.zeros((3, 3))])


@dataclass(frozen=True)
class KalmanParams:
    """Filter and association settings.

    q: white-noise acceleration intensity (m^2/s^3)
    r_pos: per-axis measurement variance (m^2)
    p0_pos, p0_vel: initial position / velocity variances
    gate: maximum Mahalanobis distance for association
    stale_after: seconds without an update before a track is closed
    """

    q: float = 1.0
    r_pos: float = 100.0**2
    p0_pos: float = 100.0**2
    p0_vel: float = 300.0**2
    gate: float = 5.0
    stale_after: float = 300.0

    def __post_init__(self):
        for name in ("q", "r_pos", "p0_pos", "p0_vel", "gate", "stale_after"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"Kalman parameter {name} must be finite and > 0")
            object.__setattr__(self, name, v)

    @classmethod
    def from_config(cls, cfg: dict[str, str]) -> "KalmanParams":
        d = cls()
        return cls(
            q=get_float(cfg, "q", d.q),
            r_pos=get_float(cfg, "r_pos", d.r_pos),
            p0_pos=get_float(cfg, "p0_pos", d.p0_pos),
            p0_vel=get_float(cfg, "p0_vel", d.p0_vel),
            gate=get_float(cfg, "gate", d.gate),
            stale_after=get_float(cfg, "stale_after", d.stale_after),
        )


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray
    cov: np.ndarray
    last_t: float

    @classmethod
    def initial(cls, pos, t: float, params: KalmanParams, vel=(0.0, 0.0, 0.0)) -> "KalmanState":
        mean = np.concatenate([np.asarray(pos, dtype=float), np.asarray(vel, dtype=float)])
        cov = np.diag([params.p0_pos] * 3 + [params.p0_vel] * 3)
        return cls(mean, cov, float(t))


def transition(dt: float) -> np.ndarray:
    F = np.eye(6)
    F[:3, 3:] = dt * np.eye(3)
    return F


def process_noise(dt: float, q: float) -> np.ndarray:
    """Discretised white-noise-acceleration covariance, per axis."""
    block = q * np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])
    Q = np.zeros((6, 6))
    for ax in range(3):
        idx = [ax, ax + 3]
        Q[np.ix_(idx, idx)] = block
    return Q


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def predict(s: KalmanState, t: float, q: float = 0.0) -> KalmanState:
    """Propagate ``s`` to time ``t`` under constant velocity."""
    dt = t - s.last_t
    if dt < 0:
        raise ValidationError(f"cannot predict backwards: t={t} < last_t={s.last_t}")
    if dt == 0:
        return s
    F = transition(dt)
    mean = F @ s.mean
    cov = _symmetrize(F @ s.cov @ F.T + process_noise(dt, q))
    return KalmanState(mean, cov, float(t))


def innovation(s: KalmanState, z, r_pos: float) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(z, dtype=float) - H @ s.mean
    S = H @ s.cov @ H.T + r_pos * np.eye(3)
    return y, S


def mahalanobis(s: KalmanState, z, r_pos: float) -> float:
    y, S = innovation(s, z, r_pos)
    return float(math.sqrt(max(y @ np.linalg.solve(S, y), 0.0)))


def update(s: KalmanState, z, params: KalmanParams | float) -> KalmanState:
    """Position-only measurement update (Joseph form, symmetrised)."""
    r_pos = params.r_pos if isinstance(params, KalmanParams) else float(params)
    y, S = innovation(s, z, r_pos)
    try:
        K = np.linalg.solve(S, H @ s.cov).T
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"singular innovation covariance at t={s.last_t}: S={S.tolist()}"
        ) from exc
    IKH = np.eye(6) - K @ H
    cov = IKH @ s.cov @ IKH.T + r_pos * K @ K.T
    return KalmanState(s.mean + K @ y, _symmetrize(cov), s.last_t)


@dataclass
class _LiveTrack:
    id: int
    state: KalmanState
    members: list


def _scan_distances(live: list[_LiveTrack], t: float, z: np.ndarray, params: KalmanParams) -> np.ndarray:
    """Mahalanobis distances, shape (tracks, detections), of one scan against predicted tracks."""
    mean = np.array([tr.state.mean for tr in live])
    cov = np.array([tr.state.cov for tr in live])
    dt = t - np.array([tr.state.last_t for tr in live])
    pos = mean[:, :3] + dt[:, None] * mean[:, 3:]
    A, B, C = cov[:, :3, :3], cov[:, :3, 3:], cov[:, 3:, 3:]
    d = dt[:, None, None]
    # position block of F P F' + Q for the constant-velocity model
    S = A + d * (B + B.transpose(0, 2, 1)) + d**2 * C
    S = S + (params.q * dt**3 / 3.0)[:, None, None] * np.eye(3) + params.r_pos * np.eye(3)
    y = z[None, :, :] - pos[:, None, :]
    sol = np.linalg.solve(S[:, None, :, :], y[..., None])[..., 0]
    return np.sqrt(np.maximum(np.einsum("tdi,tdi->td", y, sol), 0.0))


def kalman_track(ds: Dataset, params: KalmanParams) -> list[Track]:
    """Greedy nearest-neighbour association of detections to Kalman tracks.

    Detections sharing a timestamp form one scan.  For each scan, every
    (live track, detection) pair within the gate is ranked by Mahalanobis
    distance and assigned one-to-one in ascending order.  Leftover
    detections start new tracks with zero velocity.
    """
    live: list[_LiveTrack] = []
    done: list[_LiveTrack] = []
    next_id = 0
    t_all = ds.times
    pos_all = ds.positions
    k = 0
    n = len(ds)
    while k < n:
        t = t_all[k]
        stop = k
        while stop < n and t_all[stop] == t:
            stop += 1
        scan = list(range(k, stop))
        k = stop

        still = []
        for tr in live:
            (done if t - tr.state.last_t > params.stale_after else still).append(tr)
        live = still

        candidates = []
        if live and scan:
            dist = _scan_distances(live, t, pos_all[scan], params)
            for a, row in enumerate(dist):
                for col in np.flatnonzero(row <= params.gate):
                    candidates.append((float(row[col]), live[a].id, scan[col], a))
        candidates.sort()
        used_track, used_det = set(), set()
        for d, _, b, a in candidates:
            if a in used_track or b in used_det:
                continue
            used_track.add(a)
            used_det.add(b)
            predicted = predict(live[a].state, t, params.q)
            live[a].state = update(predicted, pos_all[b], params)
            live[a].members.append(ds[b].index)
        for b in scan:
            if b not in used_det:
                st = KalmanState.initial(pos_all[b], t, params)
                live.append(_LiveTrack(next_id, st, [ds[b].index]))
                next_id += 1
    done.extend(live)
    done.sort(key=lambda tr: tr.id)
    return [Track(tr.id, tuple(tr.members)) for tr in done]
