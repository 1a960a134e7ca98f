"""Greedy chain extraction from a weighted tracklet graph.

Edges are visited from lightest to heaviest and kept only when neither
endpoint would exceed an out-degree (source) or in-degree (destination) of
one.  The kept edges form vertex-disjoint paths, each of which becomes a
track.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constraint import ConstraintGates
from .kalman import KalmanParams
from .model import Dataset, Track, ValidationError, observe
from .poset import ObsArrays, TrackletGraph, build_graph
from .weights import simple_weights, tailored_weights

WEIGHTINGS = ("simple", "tailored")


@dataclass(frozen=True)
class ReducedGraph:
    matched_edges: tuple[tuple[int, int], ...]
    src_used: np.ndarray
    dst_used: np.ndarray

    @property
    def n(self) -> int:
        return len(self.src_used)


def edge_order(graph: TrackletGraph) -> np.ndarray:
    """Edge permutation sorted by (weight, src, dst)."""
    return np.lexsort((graph.dst, graph.src, graph.weight))


def reduce_graph(graph: TrackletGraph) -> ReducedGraph:
    src_used = np.zeros(graph.n, dtype=bool)
    dst_used = np.zeros(graph.n, dtype=bool)
    order = edge_order(graph)
    src = graph.src[order].tolist()
    dst = graph.dst[order].tolist()
    s_used = src_used.tolist()
    d_used = dst_used.tolist()
    matched = []
    for p1, p2 in zip(src, dst):
        if not s_used[p1] and not d_used[p2]:
            matched.append((p1, p2))
            s_used[p1] = True
            d_used[p2] = True
    return ReducedGraph(
        tuple(matched), np.array(s_used, dtype=bool), np.array(d_used, dtype=bool)
    )


def extract_chains(rg: ReducedGraph, n: Optional[int] = None) -> list[Track]:
    """Maximal paths of the matching as tracks over graph vertices.

    Unmatched vertices become singleton tracks.  Tracks are numbered in
    order of their first vertex.
    """
    n = rg.n if n is None else n
    succ = [-1] * n
    has_pred = [False] * n
    for p1, p2 in rg.matched_edges:
        if succ[p1] != -1 or has_pred[p2]:
            raise RuntimeError("reduced graph violates the degree bound")
        succ[p1] = p2
        has_pred[p2] = True
    chains = []
    seen = 0
    for v in range(n):
        if has_pred[v]:
            continue
        chain = [v]
        while succ[chain[-1]] != -1:
            chain.append(succ[chain[-1]])
        seen += len(chain)
        chains.append(chain)
    if seen != n:
        # only a cycle can hide vertices from every head
        raise RuntimeError("reduced graph contains a cycle")
    return [Track(k, tuple(c)) for k, c in enumerate(chains)]


def make_weigher(arr: ObsArrays, weighting: str, mix: Optional[Sequence[float]] = None):
    if weighting == "simple":
        return lambda s, d: simple_weights(arr, s, d)
    if weighting == "tailored":
        return lambda s, d: tailored_weights(arr, s, d, mix)
    raise ValidationError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")


def tracklet_graph(
    ds: Dataset,
    g: ConstraintGates,
    window: float,
    weighting: str = "simple",
    radii: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    mix: Optional[Sequence[float]] = None,
) -> TrackletGraph:
    obs = [observe(d, radii) for d in ds]
    arr = ObsArrays.from_observations(obs)
    return build_graph(arr, g, window, make_weigher(arr, weighting, mix))


def poset_track(
    ds: Dataset,
    g: ConstraintGates,
    window: float = 300.0,
    weighting: str = "simple",
    radii: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    kparams: Optional[KalmanParams] = None,
    mix: Optional[Sequence[float]] = None,
) -> list[Track]:
    """Track a dataset end to end: observations, graph, weights, reduction, chains.

    ``kparams`` is accepted for symmetry with the tailored weight's scalar
    form; the batch forward projection uses each detection's own velocity
    and does not depend on the noise settings.
    """
    graph = tracklet_graph(ds, g, window, weighting, radii, mix)
    rg = reduce_graph(graph)
    return [
        Track(tr.id, tuple(ds[v].index for v in tr.members))
        for tr in extract_chains(rg, graph.n)
    ]


def tracks_to_csv(tracks: Sequence[Track]) -> str:
    lines = ["track_id,detection_index\n"]
    for tr in tracks:
        lines.extend(f"{tr.id},{m}\n" for m in tr.members)
    return "".join(lines)


def read_tracks_csv(path) -> list[Track]:
    members: dict[int, list[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and row[0].strip() == "track_id"):
                continue
            try:
                tid, idx = int(row[0]), int(row[1])
            except (ValueError, IndexError):
                raise ValidationError(f"{path}:{lineno}: malformed track row {row!r}") from None
            members.setdefault(tid, []).append(idx)
    return [Track(tid, tuple(m)) for tid, m in sorted(members.items())]


def track_summary(tracks: Sequence[Track]) -> dict:
    hist: dict[int, int] = {}
    for tr in tracks:
        hist[len(tr)] = hist.get(len(tr), 0) + 1
    return {
        "track_count": len(tracks),
        "detection_count": sum(len(t) for t in tracks),
        "length_histogram": {str(k): hist[k] for k in sorted(hist)},
    }
