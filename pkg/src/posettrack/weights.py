"""Edge weights for the tracklet graph.

Only the ordering of weights matters to the tracker.  The simple weight is
the spatial distance between observations; the tailored weight sums six
min-max normalised kinematic terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kalman import KalmanParams, KalmanState, predict
from .model import Observation, ValidationError
from .poset import ObsArrays

COMPONENTS = ("horizontal", "vertical", "time", "heading", "speed", "kinematic")


def simple_weight(a: Observation, b: Observation) -> float:
    """Horizontal distance plus absolute vertical offset (m)."""
    dx = b.pos[0] - a.pos[0]
    dy = b.pos[1] - a.pos[1]
    return math.hypot(dx, dy) + abs(b.pos[2] - a.pos[2])


def simple_weights(arr: ObsArrays, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    d = arr.pos[dst] - arr.pos[src]
    return np.hypot(d[:, 0], d[:, 1]) + np.abs(d[:, 2])


def _heading_diff(va: np.ndarray, vb: np.ndarray) -> np.ndarray:
    ha = np.arctan2(va[..., 1], va[..., 0])
    hb = np.arctan2(vb[..., 1], vb[..., 0])
    d = np.abs(ha - hb) % (2 * np.pi)
    out = np.minimum(d, 2 * np.pi - d)
    still = (np.hypot(va[..., 0], va[..., 1]) == 0) | (np.hypot(vb[..., 0], vb[..., 1]) == 0)
    return np.where(still, 0.0, out)


def edge_components(arr: ObsArrays, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Raw (unnormalised) tailored-weight terms, shape (E, 6).

    Velocity-dependent terms are NaN where either endpoint has no velocity.
    The kinematic term is the miss distance of a constant-velocity forward
    projection from ``src`` to the time of ``dst``; with a known velocity the
    predicted mean does not depend on the noise settings.
    """
    d = arr.pos[dst] - arr.pos[src]
    dt = arr.t[dst] - arr.t[src]
    va, vb = arr.vel[src], arr.vel[dst]
    out = np.empty((len(src), 6))
    out[:, 0] = np.hypot(d[:, 0], d[:, 1])
    out[:, 1] = np.abs(d[:, 2])
    out[:, 2] = dt
    out[:, 3] = _heading_diff(va, vb)
    out[:, 4] = np.abs(np.linalg.norm(vb, axis=1) - np.linalg.norm(va, axis=1))
    out[:, 5] = np.linalg.norm(arr.pos[src] + va * dt[:, None] - arr.pos[dst], axis=1)
    missing = np.isnan(va).any(axis=1) | np.isnan(vb).any(axis=1)
    out[missing, 3:5] = np.nan
    out[np.isnan(va).any(axis=1), 5] = np.nan
    return out


def _pair_components(a: Observation, b: Observation, kparams: KalmanParams) -> np.ndarray:
    """Scalar counterpart of :func:`edge_components`, using the filter for term (f)."""
    out = np.full(6, np.nan)
    out[0] = math.hypot(b.pos[0] - a.pos[0], b.pos[1] - a.pos[1])
    out[1] = abs(b.pos[2] - a.pos[2])
    out[2] = b.t - a.t
    va, vb = a.det.vel, b.det.vel
    if va is not None and vb is not None:
        out[3] = float(_heading_diff(np.array(va), np.array(vb)))
        out[4] = abs(float(np.linalg.norm(vb)) - float(np.linalg.norm(va)))
    if va is not None and b.t >= a.t:
        st = KalmanState.initial(a.pos, a.t, kparams, vel=va)
        proj = predict(st, b.t, kparams.q)
        out[5] = float(np.linalg.norm(proj.mean[:3] - np.array(b.pos)))
    return out


@dataclass(frozen=True)
class ComponentStats:
    """Per-component min and max over an edge population."""

    lo: np.ndarray
    hi: np.ndarray

    def normalize(self, comps: np.ndarray) -> np.ndarray:
        span = self.hi - self.lo
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(span > 0, (comps - self.lo) / np.where(span > 0, span, 1.0), 0.0)
        return np.nan_to_num(np.clip(z, 0.0, 1.0), nan=0.0)


def component_stats(
    comps_or_arr, src: Optional[np.ndarray] = None, dst: Optional[np.ndarray] = None
) -> ComponentStats:
    """Min/max of each tailored component.

    Accepts either an (E, 6) component array or ``(ObsArrays, src, dst)``.
    Missing (NaN) entries are ignored; an all-missing column gets 0/0.
    """
    if src is not None:
        comps = edge_components(comps_or_arr, np.asarray(src), np.asarray(dst))
    else:
        comps = np.asarray(comps_or_arr, dtype=float).reshape(-1, 6)
    if len(comps) == 0:
        raise ValidationError("component statistics need at least one edge")
    lo = np.zeros(6)
    hi = np.zeros(6)
    for c in range(6):
        col = comps[:, c]
        col = col[~np.isnan(col)]
        if len(col):
            lo[c], hi[c] = col.min(), col.max()
    return ComponentStats(lo, hi)


def _mix(mix: Optional[Sequence[float]]) -> np.ndarray:
    m = np.ones(6) if mix is None else np.asarray(mix, dtype=float)
    if m.shape != (6,) or np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValidationError("mixing coefficients must be 6 finite nonnegative numbers")
    return m


def tailored_weight(
    a: Observation,
    b: Observation,
    stats: ComponentStats,
    kparams: KalmanParams,
    mix: Optional[Sequence[float]] = None,
) -> float:
    """Sum of the six normalised kinematic differences between ``a`` and ``b``."""
    z = stats.normalize(_pair_components(a, b, kparams)[None, :])[0]
    return float(z @ _mix(mix))


def tailored_weights(
    arr: ObsArrays,
    src: np.ndarray,
    dst: np.ndarray,
    mix: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Tailored weights for a whole edge population, normalised over that population."""
    comps = edge_components(arr, src, dst)
    stats = component_stats(comps)
    return stats.normalize(comps) @ _mix(mix)
