"""Windowed constraint graph over observations and poset width.

Vertices of a :class:`TrackletGraph` are positions in the time-sorted
observation list.  Edges point forward in time and carry a nonnegative
weight used later by the tracker.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .constraint import ConstraintGates, relates_arrays
from .model import Observation, ValidationError

# candidate pairs are processed in blocks of roughly this many
_BLOCK = 1 << 21

Weigher = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ObsArrays:
    """Column view of a list of observations."""

    t: np.ndarray
    pos: np.ndarray
    radii: np.ndarray
    vel: np.ndarray

    @classmethod
    def from_observations(cls, obs: Sequence[Observation]) -> "ObsArrays":
        n = len(obs)
        t = np.array([o.t for o in obs], dtype=float)
        pos = np.array([o.pos for o in obs], dtype=float).reshape(n, 3)
        radii = np.array([o.radii for o in obs], dtype=float).reshape(n, 4)
        vel = np.full((n, 3), np.nan)
        for k, o in enumerate(obs):
            if o.det.vel is not None:
                vel[k] = o.det.vel
        return cls(t, pos, radii, vel)

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class TrackletGraph:
    """Directed constraint graph stored as parallel edge arrays."""

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    window: float = np.inf

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64).reshape(-1)
        dst = np.asarray(self.dst, dtype=np.int64).reshape(-1)
        w = np.asarray(self.weight, dtype=float).reshape(-1)
        if not (len(src) == len(dst) == len(w)):
            raise ValidationError("edge arrays must have equal length")
        if len(src):
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n:
                raise ValidationError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValidationError("self-loops are not allowed")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise ValidationError("edge weights must be finite and nonnegative")
            if len(np.unique(src * self.n + dst)) != len(src):
                raise ValidationError("duplicate edges")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "weight", w)

    @classmethod
    def from_edges(cls, n: int, edges, window: float = np.inf) -> "TrackletGraph":
        """Build from ``(src, dst)`` or ``(src, dst, weight)`` tuples."""
        edges = list(edges)
        src = [e[0] for e in edges]
        dst = [e[1] for e in edges]
        w = [e[2] if len(e) > 2 else 0.0 for e in edges]
        return cls(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                   np.array(w, dtype=float), window)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(s), int(d), float(w)) for s, d, w in zip(self.src, self.dst, self.weight)]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(s), int(d)) for s, d in zip(self.src, self.dst)}

    def __len__(self) -> int:
        return len(self.src)

    def to_csv(self) -> str:
        return "".join(f"{s},{d},{w!r}\n" for s, d, w in self.edges)


def candidate_pairs(t: np.ndarray, window: float):
    """Yield blocks of ``(i, j)`` with ``0 < t[j] - t[i] <= window``, in (i, j) order."""
    n = len(t)
    lo = np.searchsorted(t, t, side="right")
    # generous bound; the exact difference test below decides
    slack = 1e-9 * (np.abs(t) + window)
    hi = np.searchsorted(t, t + window + slack, side="right")
    counts = hi - lo
    start = 0
    while start < n:
        # grow the block until it holds about _BLOCK pairs
        csum = np.cumsum(counts[start:])
        stop = start + max(int(np.searchsorted(csum, _BLOCK, side="right")), 1)
        stop = min(stop, n)
        c = counts[start:stop]
        total = int(c.sum())
        if total:
            i = np.repeat(np.arange(start, stop), c)
            offsets = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
            j = np.repeat(lo[start:stop], c) + offsets
            keep = t[j] - t[i] <= window
            yield i[keep], j[keep]
        start = stop


def build_graph(
    obs: Sequence[Observation] | ObsArrays,
    g: ConstraintGates,
    window: float,
    weigher: Optional[Weigher] = None,
) -> TrackletGraph:
    """Constraint graph over time-sorted observations.

    Edge ``(i, j)`` is present when ``0 < t_j - t_i <= window`` and
    ``relates(obs[i], obs[j], g)``.  ``weigher(src, dst)`` receives the full
    edge arrays at once and returns their weights; without it all weights
    are zero.
    """
    if not window > 0:
        raise ValidationError(f"window must be > 0, got {window}")
    arr = obs if isinstance(obs, ObsArrays) else ObsArrays.from_observations(obs)
    n = len(arr)
    if np.any(np.diff(arr.t) < 0):
        raise ValidationError("observations must be sorted by time")
    srcs, dsts = [], []
    for i, j in candidate_pairs(arr.t, window):
        keep = relates_arrays(
            arr.t[i], arr.pos[i], arr.radii[i], arr.t[j], arr.pos[j], arr.radii[j], g
        )
        srcs.append(i[keep])
        dsts.append(j[keep])
    src = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
    if weigher is None or len(src) == 0:
        w = np.zeros(len(src))
    else:
        w = np.asarray(weigher(src, dst), dtype=float)
    return TrackletGraph(n, src, dst, w, float(window))


@dataclass(frozen=True)
class WidthResult:
    width: int
    chain_cover: tuple[tuple[int, ...], ...]


def topological_order(n: int, src: np.ndarray, dst: np.ndarray) -> list[int]:
    """Kahn's algorithm (FIFO); raises RuntimeError on a cycle."""
    indeg = np.bincount(dst, minlength=n)
    order = np.argsort(src, kind="stable")
    starts = np.searchsorted(src[order], np.arange(n + 1))
    children = [dst[order[starts[v]:starts[v + 1]]] for v in range(n)]
    queue = deque(int(v) for v in np.flatnonzero(indeg == 0))
    out = []
    while queue:
        v = queue.popleft()
        out.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(int(c))
    if len(out) != n:
        raise RuntimeError("constraint graph contains a cycle")
    return out


def transitive_closure(graph: TrackletGraph) -> sp.csr_matrix:
    """Reachability matrix (strict: no diagonal) as a sparse boolean CSR matrix."""
    n = graph.n
    topo = topological_order(n, graph.src, graph.dst)
    nbytes = (n + 7) // 8
    reach = np.zeros((n, nbytes), dtype=np.uint8)
    order = np.argsort(graph.src, kind="stable")
    starts = np.searchsorted(graph.src[order], np.arange(n + 1))
    bit = (np.uint8(0x80) >> (np.arange(n) % 8).astype(np.uint8)).astype(np.uint8)
    for v in reversed(topo):
        kids = graph.dst[order[starts[v]:starts[v + 1]]]
        if len(kids) == 0:
            continue
        row = np.bitwise_or.reduce(reach[kids], axis=0)
        np.bitwise_or.at(row, kids // 8, bit[kids])
        reach[v] = row
    indptr = [0]
    indices = []
    for lo in range(0, n, 1024):
        block = np.unpackbits(reach[lo:lo + 1024], axis=1, count=n).astype(bool)
        for row in block:
            nz = np.flatnonzero(row)
            indices.append(nz)
            indptr.append(indptr[-1] + len(nz))
    idx = np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64)
    data = np.ones(len(idx), dtype=bool)
    return sp.csr_matrix((data, idx, np.array(indptr)), shape=(n, n))


def width(graph: TrackletGraph) -> WidthResult:
    """Width of the poset and a minimum chain cover witnessing it.

    Chains come from a maximum matching on the transitive closure, so a
    chain may skip over intermediate vertices.
    """
    n = graph.n
    if n == 0:
        return WidthResult(0, ())
    closure = transitive_closure(graph)
    if closure.nnz:
        succ = maximum_bipartite_matching(closure, perm_type="column")
    else:
        succ = np.full(n, -1)
    has_pred = np.zeros(n, dtype=bool)
    has_pred[succ[succ >= 0]] = True
    chains = []
    for v in range(n):
        if has_pred[v]:
            continue
        chain = [v]
        while succ[chain[-1]] >= 0:
            chain.append(int(succ[chain[-1]]))
        chains.append(tuple(chain))
    matched = int(np.count_nonzero(succ >= 0))
    assert len(chains) == n - matched
    return WidthResult(n - matched, tuple(chains))
