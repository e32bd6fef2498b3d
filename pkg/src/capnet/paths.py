"""Shortest-path statistics, clustering, and degree assortativity.

Links are treated as undirected throughout this module: components, paths,
and the endpoint-degree correlation all ignore edge direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, GraphNotConnectedError, InputError
from .graph import EntityGraph, triangles


@dataclass(frozen=True)
class PathStats:
    diameter: int
    mean_path: float
    median_path: int
    exact: bool
    sampled_sources: int | None = None

    def to_dict(self) -> dict:
        return {
            "diameter": self.diameter,
            "mean_path": self.mean_path,
            "median_path": self.median_path,
            "exact": self.exact,
            "sampled_sources": self.sampled_sources,
        }


def _bfs_distances(indptr: np.ndarray, neighbors: np.ndarray, source: int, n: int) -> np.ndarray:
    """Unweighted distances from one source; -1 marks unreachable nodes."""
    dist = np.full(n, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        idx = np.repeat(starts, counts) + (
            np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
        )
        cand = neighbors[idx]
        fresh = cand[dist[cand] < 0]
        if fresh.size == 0:
            break
        frontier = np.unique(fresh)
        d += 1
        dist[frontier] = d
    return dist


def path_stats(
    g: EntityGraph,
    sample_sources: int | None = None,
    seed: int = 0,
    exact_cap: int = 200_000,
) -> PathStats:
    """Diameter and mean/median shortest path over undirected paths.

    Exact mode (``sample_sources=None``) sweeps a BFS from every node; it
    refuses graphs larger than ``exact_cap``. Sampled mode runs BFS from
    ``sample_sources`` seeded random sources, reports mean/median over the
    sampled source-target pairs, and flags the diameter as a lower bound
    (improved by a few farthest-point sweeps).
    """
    if g.edge_count == 0:
        raise EstimationError("path statistics need at least one edge")
    indptr, neighbors, _, _ = g.undirected_adjacency()
    n = g.node_count

    probe = _bfs_distances(indptr, neighbors, 0, n)
    if np.any(probe < 0):
        raise GraphNotConnectedError()

    if sample_sources is None:
        if n > exact_cap:
            raise InputError(
                f"exact path statistics on {n} nodes exceed the cap {exact_cap}; "
                "use sampled mode"
            )
        sources = np.arange(n, dtype=np.int64)
        exact = True
    else:
        if sample_sources < 1:
            raise InputError("sample_sources must be positive")
        k = min(sample_sources, n)
        rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
        sources = np.sort(rng.choice(n, size=k, replace=False))
        exact = False

    hist = np.zeros(1, dtype=np.int64)
    diameter = 0
    farthest = 0
    for s in sources:
        dist = probe if s == 0 else _bfs_distances(indptr, neighbors, int(s), n)
        ecc = int(dist.max())
        if ecc > diameter:
            diameter = ecc
            farthest = int(np.argmax(dist))
        if ecc + 1 > len(hist):
            hist = np.concatenate([hist, np.zeros(ecc + 1 - len(hist), dtype=np.int64)])
        hist[: ecc + 1] += np.bincount(dist, minlength=ecc + 1)
    hist[0] = 0  # self-pairs excluded

    if not exact:
        # double-sweep refinement: BFS from the farthest node found so far
        for _ in range(3):
            dist = _bfs_distances(indptr, neighbors, farthest, n)
            ecc = int(dist.max())
            if ecc <= diameter:
                break
            diameter = ecc
            farthest = int(np.argmax(dist))

    total_pairs = int(hist.sum())
    distances = np.arange(len(hist), dtype=np.int64)
    mean = float(np.dot(hist, distances) / total_pairs)
    # median over the pair-distance multiset; even counts take the upper value
    median_rank = total_pairs // 2
    median = int(distances[np.searchsorted(np.cumsum(hist), median_rank, side="right")])
    return PathStats(
        diameter=diameter,
        mean_path=mean,
        median_path=median,
        exact=exact,
        sampled_sources=None if exact else int(len(sources)),
    )


def expected_small_world_diameter(n: float) -> float:
    """ln(n) / ln(ln(n)): the small-world benchmark diameter for n nodes."""
    if n < 16:
        raise InputError(f"benchmark needs n >= 16 (ln ln n safely positive), got {n}")
    return math.log(n) / math.log(math.log(n))


def avg_clustering(g: EntityGraph) -> float:
    """Mean local clustering coefficient on the undirected simplification.

    Nodes with undirected degree below 2 contribute 0 and stay in the
    denominator.
    """
    n = g.node_count
    if n == 0:
        raise EstimationError("clustering of an empty graph is undefined")
    deg = g.undirected_degrees().astype(np.float64)
    tri = np.zeros(n, dtype=np.int64)
    for u, v, w in triangles(g):
        tri[u] += 1
        tri[v] += 1
        tri[w] += 1
    possible = deg * (deg - 1) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.where(possible > 0, tri / possible, 0.0)
    return float(local.mean())


def degree_assortativity(g: EntityGraph) -> float | None:
    """Pearson correlation of endpoint degrees across the undirected links.

    Antiparallel edges collapse to one link, every link contributes both
    orientation rows, and degrees are undirected, so the coefficient ignores
    edge direction entirely. Returns None when the marginal is constant (for
    example a k-regular graph), where the coefficient is undefined.
    """
    if g.edge_count < 2:
        raise EstimationError("assortativity needs at least 2 edges")
    _, _, und_u, und_v = g.undirected_adjacency()
    if len(und_u) < 2:
        return None  # a single mutual dyad has no variation to correlate
    deg = g.undirected_degrees().astype(np.float64)
    x = np.concatenate([deg[und_u], deg[und_v]])
    y = np.concatenate([deg[und_v], deg[und_u]])
    sx = x.std()  # y is a permutation of x, so the marginals share one sd
    if sx == 0:
        return None
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sx))
