"""Parametric constraint function and the analyses built on it.

The constraint function is a set of hard gates on the time offset, the
horizontal and vertical displacement, and the implied horizontal speed
between two events.  ``relates`` asks whether some point of one observation
can reach some point of another under those gates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .config import get_float
from .model import Dataset, Observation, ValidationError

EPS_T = 1e-9

PAIRING_MODES = ("consecutive", "all_forward_pairs")


@dataclass(frozen=True)
class ConstraintGates:
    """Time, horizontal, vertical and speed gates (s, m, m, m/s).

    The defaults are the air-traffic values: 300 s, 500 km, 500 m, 300 m/s.
    """

    dt_max: float = 300.0
    horiz_max: float = 500e3
    vert_max: float = 500.0
    speed_max: float = 300.0

    def __post_init__(self):
        for name in ("dt_max", "horiz_max", "vert_max", "speed_max"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"gate {name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_config(cls, cfg: dict[str, str]) -> "ConstraintGates":
        d = cls()
        return cls(
            dt_max=get_float(cfg, "dt_max_s", d.dt_max),
            horiz_max=get_float(cfg, "horiz_max_m", d.horiz_max),
            vert_max=get_float(cfg, "vert_max_m", d.vert_max),
            speed_max=get_float(cfg, "speed_max_mps", d.speed_max),
        )

    def to_config(self) -> str:
        return (
            f"dt_max_s = {self.dt_max!r}\n"
            f"horiz_max_m = {self.horiz_max!r}\n"
            f"vert_max_m = {self.vert_max!r}\n"
            f"speed_max_mps = {self.speed_max!r}\n"
        )

    def slice_diameter(self, interval: float) -> float:
        """Diameter of the reachable region ``interval`` seconds after an event."""
        horiz = 2.0 * min(self.speed_max * interval, self.horiz_max)
        vert = 2.0 * self.vert_max
        return math.hypot(horiz, vert)


def relates(a: Observation, b: Observation, g: ConstraintGates) -> bool:
    """True if some event in ``b`` is reachable from some event in ``a``.

    Radii are handled by inflating the gates with the radius sums, which
    over-approximates the exact ellipsoid test and never misses a relation.
    """
    rt = a.radii[3] + b.radii[3]
    dt = b.t - a.t
    if dt + rt < 0 or dt - rt >= g.dt_max:
        return False
    dx = b.pos[0] - a.pos[0]
    dy = b.pos[1] - a.pos[1]
    h = max(math.hypot(dx, dy) - a.horizontal_radius - b.horizontal_radius, 0.0)
    if h >= g.horiz_max:
        return False
    v = max(abs(b.pos[2] - a.pos[2]) - a.radii[2] - b.radii[2], 0.0)
    if v >= g.vert_max:
        return False
    if h == 0.0:
        return True
    return h / max(dt + rt, EPS_T) < g.speed_max


def relates_arrays(
    ta: np.ndarray,
    pa: np.ndarray,
    ra: np.ndarray,
    tb: np.ndarray,
    pb: np.ndarray,
    rb: np.ndarray,
    g: ConstraintGates,
) -> np.ndarray:
    """Vectorised :func:`relates` over broadcastable arrays.

    ``t*`` are times, ``p*`` are (..., 3) positions and ``r*`` are (..., 4)
    radii.  Returns a boolean mask.
    """
    rt = ra[..., 3] + rb[..., 3]
    dt = tb - ta
    d = pb - pa
    rh = np.maximum(ra[..., 0], ra[..., 1]) + np.maximum(rb[..., 0], rb[..., 1])
    h = np.maximum(np.hypot(d[..., 0], d[..., 1]) - rh, 0.0)
    v = np.maximum(np.abs(d[..., 2]) - ra[..., 2] - rb[..., 2], 0.0)
    ok = (dt + rt >= 0) & (dt - rt < g.dt_max) & (h < g.horiz_max) & (v < g.vert_max)
    with np.errstate(divide="ignore", invalid="ignore"):
        speed_ok = (h == 0.0) | (h / np.maximum(dt + rt, EPS_T) < g.speed_max)
    return ok & speed_ok


@dataclass(frozen=True)
class CustodyReport:
    per_target_loss: dict
    mean_loss: float
    pairing_mode: str

    def to_dict(self) -> dict:
        return {
            "pairing_mode": self.pairing_mode,
            "mean_loss": self.mean_loss,
            "per_target_loss": {str(k): v for k, v in self.per_target_loss.items()},
        }


def _target_pairs(n: int, times: np.ndarray, mode: str):
    if mode == "consecutive":
        return [(k, k + 1) for k in range(n - 1)]
    return [(k, j) for k in range(n) for j in range(k + 1, n) if times[j] > times[k]]


def custody_loss_rate(
    ds: Dataset, g: ConstraintGates, mode: str = "consecutive"
) -> CustodyReport:
    """Empirical loss-of-custody rate per target.

    For each target, every pair of its own detections (consecutive, or all
    forward-in-time pairs) is checked against the gates; the loss is the
    fraction of pairs that fail.  Targets with a single detection have no
    pairs and are left out of the report.
    """
    if mode not in PAIRING_MODES:
        raise ValidationError(f"unknown pairing mode {mode!r}; expected one of {PAIRING_MODES}")
    groups = ds.by_target()
    zero = np.zeros(4)
    per_target: dict[Hashable, float] = {}
    for tid, rows in groups.items():
        t = ds.times[rows]
        p = ds.positions[rows]
        pairs = _target_pairs(len(rows), t, mode)
        if not pairs:
            continue
        k, j = np.array(pairs).T
        ok = relates_arrays(t[k], p[k], zero, t[j], p[j], zero, g)
        per_target[tid] = float(np.count_nonzero(~ok)) / len(pairs)
    mean = float(np.mean(list(per_target.values()))) if per_target else 0.0
    return CustodyReport(per_target, mean, mode)


def min_interpolated_distance(
    ta: np.ndarray, pa: np.ndarray, tb: np.ndarray, pb: np.ndarray
) -> float:
    """Minimum distance between two piecewise-linear paths over their common time span.

    Returns ``inf`` when the time spans do not overlap.
    """
    lo = max(ta[0], tb[0])
    hi = min(ta[-1], tb[-1])
    if lo > hi:
        return math.inf
    knots = np.union1d(ta, tb)
    knots = knots[(knots >= lo) & (knots <= hi)]
    knots = np.union1d(knots, [lo, hi])
    diff = np.column_stack(
        [np.interp(knots, ta, pa[:, c]) - np.interp(knots, tb, pb[:, c]) for c in range(3)]
    )
    best = float(np.min(np.linalg.norm(diff, axis=1)))
    # between knots the separation vector is linear; check interior minima
    d0, d1 = diff[:-1], diff[1:]
    step = d1 - d0
    denom = np.einsum("ij,ij->i", step, step)
    inner = denom > 0
    if np.any(inner):
        s = -np.einsum("ij,ij->i", d0[inner], step[inner]) / denom[inner]
        s = np.clip(s, 0.0, 1.0)
        closest = d0[inner] + s[:, None] * step[inner]
        best = min(best, float(np.min(np.linalg.norm(closest, axis=1))))
    return best


@dataclass(frozen=True)
class SeparabilityCurve:
    samples: tuple[tuple[float, float], ...]
    pair_separation: dict

    @property
    def intervals(self) -> list[float]:
        return [s[0] for s in self.samples]

    @property
    def fractions(self) -> list[float]:
        return [s[1] for s in self.samples]


def _dedupe_times(t: np.ndarray, p: np.ndarray):
    # repeated timestamps would break np.interp; keep the first sample
    keep = np.concatenate([[True], np.diff(t) > 0])
    return t[keep], p[keep]


def separability_curve(
    ds: Dataset, g: ConstraintGates, intervals: Sequence[float]
) -> SeparabilityCurve:
    """Fraction of target pairs whose paths stay separable at each sampling interval.

    A pair with minimum separation ``delta`` is separable at interval ``dt``
    when ``g.slice_diameter(dt) < delta / 2``.
    """
    intervals = [float(x) for x in intervals]
    if any(b <= a for a, b in zip(intervals, intervals[1:])):
        raise ValidationError("intervals must be strictly increasing")
    groups = ds.by_target()
    if len(groups) < 2:
        raise ValidationError("separability needs at least two targets")
    paths = {
        tid: _dedupe_times(ds.times[rows], ds.positions[rows]) for tid, rows in groups.items()
    }
    seps = {}
    for a, b in itertools.combinations(paths, 2):
        seps[(a, b)] = min_interpolated_distance(*paths[a], *paths[b])
    delta = np.array(list(seps.values()))
    samples = []
    for iv in intervals:
        frac = float(np.count_nonzero(g.slice_diameter(iv) < delta / 2.0)) / len(delta)
        samples.append((iv, frac))
    return SeparabilityCurve(tuple(samples), seps)
