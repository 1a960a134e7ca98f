"""Core records: detections, observations, datasets and tracks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


def _vec3(values, name: str) -> tuple[float, float, float]:
    vals = tuple(float(v) for v in values)
    if len(vals) != 3:
        raise ValidationError(f"{name} must have 3 components, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{name} components must be finite: {vals}")
    return vals  # type: ignore[return-value]


@dataclass(frozen=True)
class Detection:
    """A time-stamped point measurement.

    ``pos`` is (x, y, z) in meters with z vertical.  ``vel`` and ``strength``
    are optional; ``truth_id`` is an opaque identity label used only for
    evaluation.
    """

    index: int
    t: float
    pos: tuple[float, float, float]
    vel: Optional[tuple[float, float, float]] = None
    truth_id: Optional[Hashable] = None
    strength: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValidationError(f"detection {self.index}: time must be finite")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "pos", _vec3(self.pos, f"detection {self.index} pos"))
        if self.vel is not None:
            object.__setattr__(self, "vel", _vec3(self.vel, f"detection {self.index} vel"))
        if self.strength is not None:
            s = float(self.strength)
            if not s >= 0:
                raise ValidationError(f"detection {self.index}: strength must be >= 0")
            object.__setattr__(self, "strength", s)


@dataclass(frozen=True)
class Observation:
    """A detection inflated to an axis-aligned ellipsoid.

    ``radii`` is (rx, ry, rz, rt); all zero means the bare detection.
    """

    det: Detection
    radii: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    @property
    def t(self) -> float:
        return self.det.t

    @property
    def pos(self) -> tuple[float, float, float]:
        return self.det.pos

    @property
    def horizontal_radius(self) -> float:
        # bounding circle of the horizontal ellipse
        return max(self.radii[0], self.radii[1])


def _check_radii(radii) -> tuple[float, float, float, float]:
    r = tuple(float(v) for v in radii)
    if len(r) != 4:
        raise ValidationError(f"radii must be (rx, ry, rz, rt), got {len(r)} values")
    if not all(math.isfinite(v) and v >= 0 for v in r):
        raise ValidationError(f"radii must be finite and nonnegative: {r}")
    return r  # type: ignore[return-value]


def observe(det: Detection, radii: Sequence[float] = (0.0, 0.0, 0.0, 0.0)) -> Observation:
    """Wrap ``det`` in an ellipsoidal observation with the given radii."""
    return Observation(det, _check_radii(radii))


def _sort_key(d: Detection):
    return (d.t, d.index)


@dataclass(frozen=True)
class Dataset:
    """Detections ordered by (t, index).

    Use :meth:`from_detections` to build one from unsorted input; the
    constructor itself only validates.
    """

    detections: tuple[Detection, ...]
    name: str = ""

    def __post_init__(self):
        dets = tuple(self.detections)
        object.__setattr__(self, "detections", dets)
        idx = sorted(d.index for d in dets)
        if idx != list(range(len(dets))):
            raise ValidationError("detection indices must be exactly 0..n-1")
        for a, b in zip(dets, dets[1:]):
            if _sort_key(a) > _sort_key(b):
                raise ValidationError(
                    f"detections not sorted by (t, index) at index {b.index}"
                )

    @classmethod
    def from_detections(cls, detections: Iterable[Detection], name: str = "") -> "Dataset":
        return cls(tuple(sorted(detections, key=_sort_key)), name)

    def sorted(self) -> "Dataset":
        return Dataset.from_detections(self.detections, self.name)

    def __len__(self) -> int:
        return len(self.detections)

    def __iter__(self):
        return iter(self.detections)

    def __getitem__(self, i: int) -> Detection:
        return self.detections[i]

    @cached_property
    def position_of(self) -> dict[int, int]:
        """Map detection index -> position in this dataset."""
        return {d.index: k for k, d in enumerate(self.detections)}

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([d.t for d in self.detections], dtype=float)

    @cached_property
    def positions(self) -> np.ndarray:
        if not self.detections:
            return np.zeros((0, 3))
        return np.array([d.pos for d in self.detections], dtype=float)

    @cached_property
    def velocities(self) -> np.ndarray:
        """(n, 3) array, NaN rows where velocity is absent."""
        out = np.full((len(self.detections), 3), np.nan)
        for k, d in enumerate(self.detections):
            if d.vel is not None:
                out[k] = d.vel
        return out

    @cached_property
    def truth_ids(self) -> list:
        return [d.truth_id for d in self.detections]

    def require_truth(self) -> None:
        for d in self.detections:
            if d.truth_id is None:
                raise ValidationError(f"detection {d.index} has no truth_id")

    def by_target(self) -> dict:
        """Group positions by truth id, in order of first appearance."""
        self.require_truth()
        groups: dict = {}
        for k, d in enumerate(self.detections):
            groups.setdefault(d.truth_id, []).append(k)
        return groups

    def check_track(self, track: "Track") -> None:
        pos = self.position_of
        for m in track.members:
            if m not in pos:
                raise ValidationError(f"track {track.id} references missing detection {m}")
        ts = [self.detections[pos[m]].t for m in track.members]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValidationError(f"track {track.id} is not time-ordered")


@dataclass(frozen=True)
class Track:
    id: int
    members: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValidationError(f"track {self.id} is empty")
        if len(set(members)) != len(members):
            raise ValidationError(f"track {self.id} has duplicate members")

    def __len__(self) -> int:
        return len(self.members)
