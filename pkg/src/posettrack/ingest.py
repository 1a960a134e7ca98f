"""Detection I/O, experiment subsampling, synthetic scenarios and sonar preprocessing."""

from __future__ import annotations

import csv
import math
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import get_float, get_floats
from .model import Dataset, Detection, ValidationError

BASE_COLUMNS = ["id", "t", "x", "y", "z"]
VEL_COLUMNS = ["vx", "vy", "vz"]


# --- detections CSV ---------------------------------------------------------


def _parse_header(header: list[str], path) -> tuple[bool, bool]:
    cols = [c.strip() for c in header]
    for has_vel in (False, True):
        for has_str in (False, True):
            want = BASE_COLUMNS + (VEL_COLUMNS if has_vel else []) + (["strength"] if has_str else [])
            if cols == want:
                return has_vel, has_str
    raise ValidationError(
        f"{path}:1: bad header {','.join(cols)!r}; expected id,t,x,y,z[,vx,vy,vz][,strength]"
    )


def read_detections_csv(path, name: Optional[str] = None) -> Dataset:
    """Load detections; row order gives the index, blank ids mean no truth."""
    path = Path(path)
    dets = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty file (missing header)")
        has_vel, has_str = _parse_header(header, path)
        width = 5 + 3 * has_vel + has_str
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ValidationError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
            try:
                tid = row[0].strip() or None
                t = float(row[1])
                pos = tuple(float(v) for v in row[2:5])
                vel = None
                col = 5
                if has_vel:
                    raw = [c.strip() for c in row[5:8]]
                    if any(raw):
                        vel = tuple(float(v) for v in raw)
                    col = 8
                strength = None
                if has_str and row[col].strip():
                    strength = float(row[col])
                dets.append(Detection(len(dets), t, pos, vel, tid, strength))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return Dataset.from_detections(dets, name if name is not None else path.stem)


def detections_to_csv(ds: Dataset) -> str:
    """Serialise in index order so that reading back reproduces the indices."""
    has_vel = any(d.vel is not None for d in ds)
    has_str = any(d.strength is not None for d in ds)
    cols = BASE_COLUMNS + (VEL_COLUMNS if has_vel else []) + (["strength"] if has_str else [])
    lines = [",".join(cols) + "\n"]
    for d in sorted(ds, key=lambda d: d.index):
        row = ["" if d.truth_id is None else str(d.truth_id), repr(d.t)]
        row += [repr(v) for v in d.pos]
        if has_vel:
            row += ["", "", ""] if d.vel is None else [repr(v) for v in d.vel]
        if has_str:
            row.append("" if d.strength is None else repr(d.strength))
        lines.append(",".join(row) + "\n")
    return "".join(lines)


def write_detections_csv(ds: Dataset, path) -> None:
    Path(path).write_text(detections_to_csv(ds))


def reindexed(dets: Sequence[Detection], name: str) -> Dataset:
    """Sort by (t, old index) and renumber 0..n-1 in that order."""
    ordered = sorted(dets, key=lambda d: (d.t, d.index))
    out = [
        Detection(k, d.t, d.pos, d.vel, d.truth_id, d.strength) for k, d in enumerate(ordered)
    ]
    return Dataset(tuple(out), name)


# --- density / time subsampling -------------------------------------------


def subsample(ds: Dataset, m: int, n: int) -> Dataset:
    """Keep every ``m``-th target (by first appearance) and every ``n``-th sample of each."""
    if m < 1 or n < 1:
        raise ValidationError(f"subsample factors must be >= 1, got m={m}, n={n}")
    groups = ds.by_target()
    keep = []
    for rank, rows in enumerate(groups.values()):
        if rank % m:
            continue
        keep.extend(ds[r] for r in rows[::n])
    return reindexed(keep, f"{ds.name}_{m}_{n}" if ds.name else f"{m}_{n}")


# --- synthetic scenarios ----------------------------------------------------


@dataclass(frozen=True)
class ScenarioSpec:
    """Random-waypoint scenario description.

    Each target follows straight segments between ``n_waypoints`` waypoints
    spread evenly over ``duration``; segment speeds never exceed
    ``speed_max``.  ``box`` is the (x, y, z) extent of the region in meters.
    """

    n_targets: int = 10
    duration: float = 2400.0
    sample_interval: float = 10.0
    speed_max: float = 250.0
    n_waypoints: int = 4
    box: tuple[float, float, float] = (500e3, 500e3, 0.0)
    dropout: float = 0.0
    clutter_rate: float = 0.0
    noise_sigma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if self.n_targets < 0:
            raise ValidationError("n_targets must be >= 0")
        if not self.duration >= 0:
            raise ValidationError("duration must be >= 0")
        if not self.sample_interval > 0:
            raise ValidationError("sample_interval must be > 0")
        if not self.speed_max > 0:
            raise ValidationError("speed_max must be > 0")
        if self.n_waypoints < 2:
            raise ValidationError("need at least 2 waypoints")
        if len(self.box) != 3 or any(not (b >= 0 and math.isfinite(b)) for b in self.box):
            raise ValidationError("box extents must be 3 finite nonnegative numbers")
        if self.n_targets and not any(self.box):
            raise ValidationError("a zero-volume box leaves targets no room to move")
        if not 0 <= self.dropout < 1:
            raise ValidationError("dropout must lie in [0, 1)")
        if not self.clutter_rate >= 0:
            raise ValidationError("clutter_rate must be >= 0")
        if len(self.noise_sigma) != 3 or any(not s >= 0 for s in self.noise_sigma):
            raise ValidationError("noise_sigma must be 3 nonnegative numbers")

    @classmethod
    def from_config(cls, cfg: dict[str, str], **overrides) -> "ScenarioSpec":
        d = cls()
        kw = dict(
            n_targets=int(get_float(cfg, "n_targets", d.n_targets)),
            duration=get_float(cfg, "duration_s", d.duration),
            sample_interval=get_float(cfg, "sample_interval_s", d.sample_interval),
            speed_max=get_float(cfg, "speed_max_mps", d.speed_max),
            n_waypoints=int(get_float(cfg, "n_waypoints", d.n_waypoints)),
            box=get_floats(cfg, "box_m", d.box),
            dropout=get_float(cfg, "dropout", d.dropout),
            clutter_rate=get_float(cfg, "clutter_rate", d.clutter_rate),
            noise_sigma=get_floats(cfg, "noise_sigma_m", d.noise_sigma),
            seed=int(get_float(cfg, "seed", d.seed)),
            name=cfg.get("name", d.name),
        )
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


def _fold(x: np.ndarray, extent: np.ndarray) -> np.ndarray:
    """Reflect coordinates back into [0, extent]; 1-Lipschitz per axis."""
    out = np.zeros_like(x)
    live = extent > 0
    period = 2 * extent[live]
    r = np.mod(x[..., live], period)
    out[..., live] = extent[live] - np.abs(r - extent[live])
    return out


def _sample_truth(rng: np.random.Generator, spec: ScenarioSpec, times: np.ndarray):
    extent = np.asarray(spec.box, dtype=float)
    live = extent > 0
    seg = spec.duration / (spec.n_waypoints - 1) if spec.duration > 0 else 1.0
    wp = np.empty((spec.n_waypoints, 3))
    wp[0] = rng.uniform(0, 1, 3) * extent
    for k in range(1, spec.n_waypoints):
        direction = np.zeros(3)
        direction[live] = rng.normal(size=int(live.sum()))
        direction /= np.linalg.norm(direction)
        step = direction * spec.speed_max * seg * rng.uniform(0.3, 1.0)
        wp[k] = _fold(wp[k - 1] + step, extent)
    wp_t = np.linspace(0.0, spec.duration, spec.n_waypoints)
    k = np.clip(np.searchsorted(wp_t, times, side="right") - 1, 0, spec.n_waypoints - 2)
    frac = ((times - wp_t[k]) / seg)[:, None]
    pos = wp[k] + frac * (wp[k + 1] - wp[k])
    vel = (wp[k + 1] - wp[k]) / seg
    return pos, vel


def generate_scenario(spec: ScenarioSpec) -> Dataset:
    """Draw a deterministic synthetic dataset from ``spec``.

    Truth targets are sampled at ``0, dt, 2 dt, ... <= duration``; clutter
    points have no truth id and no velocity.
    """
    rng = np.random.default_rng(spec.seed)
    n_samples = int(math.floor(spec.duration / spec.sample_interval + 1e-9)) + 1
    times = np.arange(n_samples) * spec.sample_interval
    sigma = np.asarray(spec.noise_sigma, dtype=float)
    dets = []
    for tgt in range(spec.n_targets):
        pos, vel = _sample_truth(rng, spec, times)
        noisy = pos + rng.normal(size=pos.shape) * sigma
        kept = rng.uniform(size=n_samples) >= spec.dropout
        for k in np.flatnonzero(kept):
            dets.append((times[k], tgt, noisy[k], vel[k], str(tgt)))
    extent = np.asarray(spec.box, dtype=float)
    n_clutter = rng.poisson(spec.clutter_rate * spec.duration) if spec.clutter_rate else 0
    for c in range(n_clutter):
        t = rng.uniform(0, spec.duration)
        dets.append((t, spec.n_targets + c, rng.uniform(0, 1, 3) * extent, None, None))
    dets.sort(key=lambda r: (r[0], r[1]))
    out = [
        Detection(k, float(t), tuple(p), None if v is None else tuple(v), tid)
        for k, (t, _, p, v, tid) in enumerate(dets)
    ]
    return Dataset(tuple(out), spec.name)


def _constant_velocity_tracks(starts, vels, times, names, sigma, rng, name) -> Dataset:
    rows = []
    for tgt, (p0, v) in enumerate(zip(starts, vels)):
        pos = p0[None, :] + times[:, None] * v[None, :]
        pos = pos + rng.normal(size=pos.shape) * sigma
        for k, t in enumerate(times):
            rows.append((t, tgt, pos[k], v, names[tgt]))
    rows.sort(key=lambda r: (r[0], r[1]))
    dets = [
        Detection(k, float(t), tuple(p), tuple(v), tid)
        for k, (t, _, p, v, tid) in enumerate(rows)
    ]
    return Dataset(tuple(dets), name)


def crossing_scenario(
    n_targets: int,
    seed: int,
    speed: tuple[float, float] = (150.0, 250.0),
    radius: float = 60e3,
    spread: float = 5e3,
    sample_interval: float = 30.0,
    noise: float = 0.0,
) -> Dataset:
    """Straight-line targets whose paths all cross near the origin mid-scenario.

    Each target starts ``radius`` out at a random bearing and flies toward a
    point within ``spread`` of the origin, so every pair comes close at
    roughly the same time.
    """
    rng = np.random.default_rng(seed)
    bearing = rng.uniform(0, 2 * np.pi, n_targets)
    aim = rng.uniform(-spread, spread, (n_targets, 2))
    spd = rng.uniform(*speed, n_targets)
    starts = np.zeros((n_targets, 3))
    starts[:, 0] = radius * np.cos(bearing)
    starts[:, 1] = radius * np.sin(bearing)
    heading = aim - starts[:, :2]
    heading /= np.linalg.norm(heading, axis=1, keepdims=True)
    vels = np.zeros((n_targets, 3))
    vels[:, :2] = heading * spd[:, None]
    # duration so the slowest target has travelled twice the radius
    duration = 2 * radius / speed[0]
    times = np.arange(0.0, duration + 1e-9, sample_interval)
    names = [str(k) for k in range(n_targets)]
    return _constant_velocity_tracks(
        starts, vels, times, names, np.array([noise, noise, 0.0]), rng, f"crossing_{seed}"
    )


def parallel_scenario(
    n_targets: int,
    separation: float,
    seed: int,
    speed: float = 200.0,
    duration: float = 1200.0,
    sample_interval: float = 10.0,
) -> Dataset:
    """Targets on parallel straight lines ``separation`` meters apart, same velocity.

    The heading is drawn from ``seed``; pairwise distance stays at least
    ``separation`` at every instant.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi)
    along = np.array([np.cos(theta), np.sin(theta), 0.0])
    across = np.array([-np.sin(theta), np.cos(theta), 0.0])
    starts = np.array([k * separation * across for k in range(n_targets)])
    vels = np.tile(along * speed, (n_targets, 1))
    times = np.arange(0.0, duration + 1e-9, sample_interval)
    names = [str(k) for k in range(n_targets)]
    return _constant_velocity_tracks(
        starts, vels, times, names, np.zeros(3), rng, f"parallel_{seed}"
    )


# --- sonar preprocessing ----------------------------------------------------


@dataclass(frozen=True)
class PulseMatrix:
    """Echo magnitudes, one row per pulse (slow time), one column per range cell."""

    data: np.ndarray
    prf: float = 29.4
    sample_rate: float = 44100.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValidationError("pulse matrix must be two-dimensional")
        if np.any(data < 0) or not np.all(np.isfinite(data)):
            raise ValidationError("pulse magnitudes must be finite and nonnegative")
        if not (self.prf > 0 and self.sample_rate > 0):
            raise ValidationError("prf and sample_rate must be > 0")
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def read_pulses_csv(path, prf: float = 29.4, sample_rate: float = 44100.0) -> PulseMatrix:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return PulseMatrix(np.abs(data), prf, sample_rate)


def read_pulses_wav(path, prf: float = 29.4) -> PulseMatrix:
    """Slice a 16-bit mono WAV into pulse rows of ``round(rate / prf)`` samples."""
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1 or w.getsampwidth() != 2:
            raise ValidationError(f"{path}: need 16-bit mono PCM")
        rate = w.getframerate()
        raw = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
    per = int(round(rate / prf))
    rows = len(raw) // per
    if rows == 0:
        raise ValidationError(f"{path}: shorter than one pulse ({per} samples)")
    mags = np.abs(raw[: rows * per].astype(float)).reshape(rows, per) / 32768.0
    return PulseMatrix(mags, prf, float(rate))


def align_pulses(pm: PulseMatrix) -> PulseMatrix:
    """Rotate each pulse so its strongest sample lands at index 0."""
    if pm.data.size == 0:
        raise ValidationError("pulse matrix is empty")
    shift = np.argmax(pm.data, axis=1)
    cols = (np.arange(pm.data.shape[1])[None, :] + shift[:, None]) % pm.data.shape[1]
    rows = np.arange(pm.data.shape[0])[:, None]
    return PulseMatrix(pm.data[rows, cols], pm.prf, pm.sample_rate, pm.meta)


def cfar_mask(data: np.ndarray, window: int, guard: int, factor: float) -> np.ndarray:
    """Cell-averaging CFAR exceedances along each row.

    ``window`` is the half-width of the reference window (guard included),
    so each side contributes ``window - guard`` training cells; near the
    edges only the cells that exist are averaged.
    """
    n_rows, n = data.shape
    c = np.zeros((n_rows, n + 1))
    np.cumsum(data, axis=1, out=c[:, 1:])
    i = np.arange(n)

    def span(lo, hi):
        lo = np.clip(lo, 0, n)
        hi = np.clip(hi, 0, n)
        hi = np.maximum(hi, lo)
        return c[:, hi] - c[:, lo], hi - lo

    s_left, n_left = span(i - window, i - guard)
    s_right, n_right = span(i + guard + 1, i + window + 1)
    count = n_left + n_right
    with np.errstate(divide="ignore", invalid="ignore"):
        noise = (s_left + s_right) / np.where(count > 0, count, 1)
    return (data > factor * noise) & (count > 0)


def cfar_detect(
    pm: PulseMatrix, window: int = 100, guard: int = 10, factor: float = 5.0
) -> Dataset:
    """CA-CFAR per pulse, merging runs of firing cells into centroid detections.

    Each detection has range (in cells) along x, time ``pulse / prf`` and
    strength equal to the summed magnitude of its run.
    """
    if not (window > guard >= 0):
        raise ValidationError(f"need window > guard >= 0, got window={window}, guard={guard}")
    if not factor > 1:
        raise ValidationError(f"CFAR factor must be > 1, got {factor}")
    n_pulses, n = pm.data.shape
    if 2 * window + 1 > n:
        raise ValidationError(f"CFAR window 2*{window}+1 exceeds pulse length {n}")
    mask = cfar_mask(pm.data, window, guard, factor)
    dets = []
    for p in range(n_pulses):
        fire = np.flatnonzero(mask[p])
        if len(fire) == 0:
            continue
        breaks = np.flatnonzero(np.diff(fire) > 1) + 1
        for run in np.split(fire, breaks):
            w = pm.data[p, run]
            total = float(w.sum())
            centroid = float(w @ run / total)
            dets.append(Detection(len(dets), p / pm.prf, (centroid, 0.0, 0.0), strength=total))
    return Dataset(tuple(dets), "sonar")
