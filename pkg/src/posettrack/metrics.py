"""Track quality against truth identities.

Four measures: tracks per target, targets per track, misidentification
fraction per track, and the longest-track length ratio per target.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Dataset, Track

HIST_EDGES = np.linspace(0.0, 1.0, 11)


def histogram(values) -> list[int]:
    """Counts over ten equal bins on [0, 1]; 1.0 falls in the last bin."""
    counts, _ = np.histogram(np.asarray(list(values), dtype=float), bins=HIST_EDGES)
    return [int(c) for c in counts]


@dataclass(frozen=True)
class EvalReport:
    tracks_per_target: dict
    targets_per_track: dict
    misid: dict
    length_ratio: dict

    @staticmethod
    def _mean(d: dict) -> float:
        return float(np.mean(list(d.values()))) if d else 0.0

    @property
    def mean_tracks_per_target(self) -> float:
        return self._mean(self.tracks_per_target)

    @property
    def mean_targets_per_track(self) -> float:
        return self._mean(self.targets_per_track)

    @property
    def mean_misid(self) -> float:
        return self._mean(self.misid)

    @property
    def mean_length_ratio(self) -> float:
        return self._mean(self.length_ratio)

    @property
    def misid_histogram(self) -> list[int]:
        return histogram(self.misid.values())

    @property
    def length_ratio_histogram(self) -> list[int]:
        return histogram(self.length_ratio.values())

    def to_dict(self) -> dict:
        def keyed(d):
            return {str(k): v for k, v in d.items()}

        return {
            "tracks_per_target": keyed(self.tracks_per_target),
            "mean_tracks_per_target": self.mean_tracks_per_target,
            "targets_per_track": keyed(self.targets_per_track),
            "mean_targets_per_track": self.mean_targets_per_track,
            "misid": keyed(self.misid),
            "mean_misid": self.mean_misid,
            "length_ratio": keyed(self.length_ratio),
            "mean_length_ratio": self.mean_length_ratio,
            "misid_histogram": self.misid_histogram,
            "length_ratio_histogram": self.length_ratio_histogram,
        }


def histogram_csv(counts: Sequence[int]) -> str:
    lines = ["bin_low,bin_high,count\n"]
    for lo, hi, c in zip(HIST_EDGES[:-1], HIST_EDGES[1:], counts):
        lines.append(f"{lo:.1f},{hi:.1f},{c}\n")
    return "".join(lines)


def evaluate(tracks: Sequence[Track], ds: Dataset) -> EvalReport:
    ds.require_truth()
    for tr in tracks:
        ds.check_track(tr)
    pos = ds.position_of
    target_size = Counter(d.truth_id for d in ds)

    tracks_per_target = {tid: 0 for tid in target_size}
    longest = {tid: 0 for tid in target_size}
    targets_per_track = {}
    misid = {}
    for tr in tracks:
        ids = [ds[pos[m]].truth_id for m in tr.members]
        counts = Counter(ids)  # insertion order = first appearance in the track
        majority = max(counts.values())
        targets_per_track[tr.id] = len(counts)
        misid[tr.id] = (len(ids) - majority) / len(ids)
        for tid in counts:
            tracks_per_target[tid] += 1
            longest[tid] = max(longest[tid], len(tr))
    length_ratio = {tid: min(1.0, longest[tid] / target_size[tid]) for tid in target_size}
    return EvalReport(tracks_per_target, targets_per_track, misid, length_ratio)
