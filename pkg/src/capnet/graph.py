"""Immutable directed graph with dense integer node indices.

Node attributes are stored columnar (numpy arrays plus id/naics lists) so a
multi-million-node network fits comfortably in memory and every downstream
statistic can work on vectors. Missing assets/wages/shares are NaN.

Edges are deduplicated at build time and sorted by (parent, child), so two
graphs built from permutations of the same records are identical object for
object, which keeps every downstream statistic order-independent.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .records import (
    KIND_CODES,
    KIND_FROM_CODE,
    EdgeRecord,
    NodeKind,
    NodeRecord,
    ParseStats,
    merge_duplicate_edges,
)


class EntityGraph:
    """Directed ownership graph: edge parent -> child, optional share of the child.

    Construction is done through :func:`build_graph` or
    :meth:`EntityGraph.from_arrays`; instances are immutable afterwards (the
    backing arrays are marked read-only), so any number of readers may share
    one graph.
    """

    __slots__ = (
        "ids",
        "kinds",
        "naics",
        "assets",
        "wages",
        "parents",
        "children",
        "shares",
        "year",
        "_out_indptr",
        "_out_children",
        "_out_eids",
        "_in_indptr",
        "_in_parents",
        "_in_eids",
        "_id_index",
        "_und_cache",
        "_tri_cache",
    )

    def __init__(
        self,
        ids: list[str],
        kinds: np.ndarray,
        naics: list[str | None],
        assets: np.ndarray,
        wages: np.ndarray,
        parents: np.ndarray,
        children: np.ndarray,
        shares: np.ndarray,
        year: int | None = None,
    ):
        n = len(ids)
        self.ids = ids
        self.kinds = kinds
        self.naics = naics
        self.assets = assets
        self.wages = wages
        order = np.lexsort((children, parents))
        self.parents = np.ascontiguousarray(parents[order])
        self.children = np.ascontiguousarray(children[order])
        self.shares = np.ascontiguousarray(shares[order])
        self.year = year

        m = len(self.parents)
        eids = np.arange(m, dtype=np.int64)
        self._out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.parents, minlength=n), out=self._out_indptr[1:])
        self._out_children = self.children
        self._out_eids = eids

        in_order = np.argsort(self.children, kind="stable")
        self._in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.children, minlength=n), out=self._in_indptr[1:])
        self._in_parents = np.ascontiguousarray(self.parents[in_order])
        self._in_eids = np.ascontiguousarray(eids[in_order])

        for arr in (
            self.kinds,
            self.assets,
            self.wages,
            self.parents,
            self.children,
            self.shares,
            self._out_indptr,
            self._in_indptr,
            self._in_parents,
            self._in_eids,
        ):
            arr.flags.writeable = False
        self._id_index: dict[str, int] | None = None
        self._und_cache: tuple | None = None
        self._tri_cache: np.ndarray | None = None

    # -- basic accessors ---------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return len(self.parents)

    @property
    def is_empty(self) -> bool:
        """Empty-network signal: no nodes survived a filter."""
        return self.node_count == 0

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_indptr)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_indptr)

    def out_children(self, v: int) -> np.ndarray:
        return self._out_children[self._out_indptr[v] : self._out_indptr[v + 1]]

    def out_edge_ids(self, v: int) -> np.ndarray:
        return self._out_eids[self._out_indptr[v] : self._out_indptr[v + 1]]

    def in_parents(self, v: int) -> np.ndarray:
        return self._in_parents[self._in_indptr[v] : self._in_indptr[v + 1]]

    def in_edge_ids(self, v: int) -> np.ndarray:
        return self._in_eids[self._in_indptr[v] : self._in_indptr[v + 1]]

    def node_index(self, node_id: str) -> int:
        if self._id_index is None:
            self._id_index = {nid: i for i, nid in enumerate(self.ids)}
        return self._id_index[node_id]

    def node_record(self, v: int) -> NodeRecord:
        """Materialize the node attributes back into a NodeRecord."""
        assets = self.assets[v]
        wages = self.wages[v]
        return NodeRecord(
            id=self.ids[v],
            kind=KIND_FROM_CODE[int(self.kinds[v])],
            naics=self.naics[v],
            assets=None if np.isnan(assets) else float(assets),
            wages=None if np.isnan(wages) else float(wages),
        )

    def __repr__(self) -> str:
        return f"EntityGraph(nodes={self.node_count}, edges={self.edge_count}, year={self.year})"

    # -- construction ------------------------------------------------------

    @classmethod
    def from_arrays(
        cls,
        parents: np.ndarray,
        children: np.ndarray,
        n_nodes: int,
        shares: np.ndarray | None = None,
        ids: list[str] | None = None,
        kinds: np.ndarray | None = None,
        naics: list[str | None] | None = None,
        assets: np.ndarray | None = None,
        wages: np.ndarray | None = None,
        year: int | None = None,
    ) -> "EntityGraph":
        """Fast constructor for synthetic graphs (index-valued edge arrays).

        Duplicate (parent, child) pairs collapse to one edge keeping the first
        occurrence's share; self-loops are rejected.
        """
        parents = np.asarray(parents, dtype=np.int64)
        children = np.asarray(children, dtype=np.int64)
        if parents.size and (parents.min() < 0 or parents.max() >= n_nodes):
            raise InputError("parent index out of range")
        if children.size and (children.min() < 0 or children.max() >= n_nodes):
            raise InputError("child index out of range")
        if np.any(parents == children):
            bad = int(np.argmax(parents == children))
            raise InputError(f"self-loop at edge position {bad}")
        shares = (
            np.full(len(parents), np.nan)
            if shares is None
            else np.asarray(shares, dtype=np.float64)
        )
        code = parents * np.int64(n_nodes) + children
        _, first = np.unique(code, return_index=True)
        first.sort()
        parents, children, shares = parents[first], children[first], shares[first]

        if ids is None:
            width = len(str(max(n_nodes - 1, 1)))
            ids = [f"n{i:0{width}d}" for i in range(n_nodes)]
        if kinds is None:
            kinds = np.full(n_nodes, KIND_CODES[NodeKind.TB_PARTNERSHIP], dtype=np.int8)
        if naics is None:
            naics = [None] * n_nodes
        if assets is None:
            assets = np.full(n_nodes, np.nan)
        if wages is None:
            wages = np.full(n_nodes, np.nan)
        return cls(ids, kinds, naics, assets, wages, parents, children, shares, year=year)

    def induced_subgraph(self, keep: np.ndarray) -> "EntityGraph":
        """Subgraph on the nodes where ``keep`` is True, with edges inside it."""
        keep = np.asarray(keep, dtype=bool)
        new_index = np.cumsum(keep) - 1
        edge_mask = keep[self.parents] & keep[self.children]
        kept = np.flatnonzero(keep)
        ids = [self.ids[i] for i in kept]
        naics = [self.naics[i] for i in kept]
        return EntityGraph(
            ids,
            self.kinds[kept].copy(),
            naics,
            self.assets[kept].copy(),
            self.wages[kept].copy(),
            new_index[self.parents[edge_mask]],
            new_index[self.children[edge_mask]],
            self.shares[edge_mask].copy(),
            year=self.year,
        )

    def subgraph_from_edges(self, edge_mask: np.ndarray) -> "EntityGraph":
        """Subgraph containing exactly the selected edges and their endpoints."""
        edge_mask = np.asarray(edge_mask, dtype=bool)
        keep = np.zeros(self.node_count, dtype=bool)
        keep[self.parents[edge_mask]] = True
        keep[self.children[edge_mask]] = True
        new_index = np.cumsum(keep) - 1
        kept = np.flatnonzero(keep)
        return EntityGraph(
            [self.ids[i] for i in kept],
            self.kinds[kept].copy(),
            [self.naics[i] for i in kept],
            self.assets[kept].copy(),
            self.wages[kept].copy(),
            new_index[self.parents[edge_mask]],
            new_index[self.children[edge_mask]],
            self.shares[edge_mask].copy(),
            year=self.year,
        )

    # -- undirected view ---------------------------------------------------

    def undirected_adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Simple undirected adjacency: (indptr, neighbors, und_u, und_v).

        Parallel/antiparallel directed edges collapse to one undirected edge;
        (und_u, und_v) lists each undirected edge once with u < v. Cached,
        which is safe because the graph is immutable.
        """
        if self._und_cache is not None:
            return self._und_cache
        n = self.node_count
        u = np.minimum(self.parents, self.children)
        v = np.maximum(self.parents, self.children)
        code = np.unique(u * np.int64(max(n, 1)) + v)
        und_u = (code // max(n, 1)).astype(np.int64)
        und_v = (code % max(n, 1)).astype(np.int64)
        ends = np.concatenate([und_u, und_v])
        nbrs_of = np.concatenate([und_v, und_u])
        order = np.argsort(ends, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=n), out=indptr[1:])
        neighbors = nbrs_of[order]
        # sort each neighbor list for fast intersection
        for arr in (indptr, neighbors, und_u, und_v):
            arr.flags.writeable = False
        self._und_cache = (indptr, neighbors, und_u, und_v)
        return self._und_cache

    def undirected_degrees(self) -> np.ndarray:
        indptr, _, _, _ = self.undirected_adjacency()
        return np.diff(indptr)


def build_graph(
    nodes: list[NodeRecord],
    edges: list[EdgeRecord],
    year: int | None = None,
    stats: ParseStats | None = None,
) -> EntityGraph:
    """Assemble an EntityGraph from validated records.

    Duplicate (parent, child) pairs are merged with share reconciliation (see
    :func:`capnet.records.merge_duplicate_edges`); unknown endpoint ids and
    self-loops raise :class:`InputError` naming the offending edge position.
    """
    index: dict[str, int] = {}
    for i, rec in enumerate(nodes):
        rec.validate(row=i + 1)
        if rec.id in index:
            raise InputError(f"duplicate node id {rec.id!r}", row=i + 1)
        index[rec.id] = i

    for i, rec in enumerate(edges):
        rec.validate(row=i + 1)
        for label, nid in (("parent", rec.parent_id), ("child", rec.child_id)):
            if nid not in index:
                raise InputError(f"unknown {label} id {nid!r} in edge", row=i + 1)

    merged = merge_duplicate_edges(edges, stats)
    m = len(merged)
    parents = np.empty(m, dtype=np.int64)
    children = np.empty(m, dtype=np.int64)
    shares = np.full(m, np.nan)
    for i, rec in enumerate(merged):
        parents[i] = index[rec.parent_id]
        children[i] = index[rec.child_id]
        if rec.share is not None:
            shares[i] = rec.share

    kinds = np.fromiter((KIND_CODES[r.kind] for r in nodes), dtype=np.int8, count=len(nodes))
    assets = np.fromiter(
        (np.nan if r.assets is None else r.assets for r in nodes), dtype=np.float64, count=len(nodes)
    )
    wages = np.fromiter(
        (np.nan if r.wages is None else r.wages for r in nodes), dtype=np.float64, count=len(nodes)
    )
    return EntityGraph(
        [r.id for r in nodes],
        kinds,
        [r.naics for r in nodes],
        assets,
        wages,
        parents,
        children,
        shares,
        year=year,
    )


def degree_of(g: EntityGraph, v: int, direction: str) -> int:
    """Degree of node ``v``; ``direction`` is "in" or "out"."""
    if not 0 <= v < g.node_count:
        raise IndexError(f"node index {v} out of range [0, {g.node_count})")
    if direction == "out":
        return int(g._out_indptr[v + 1] - g._out_indptr[v])
    if direction == "in":
        return int(g._in_indptr[v + 1] - g._in_indptr[v])
    raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")


def triangles(g: EntityGraph) -> np.ndarray:
    """All triangles of the undirected simplification, as an (t, 3) index array.

    Degree-ordered enumeration: each undirected edge is oriented from its
    lower-rank endpoint to its higher-rank endpoint, and each triangle is
    found exactly once as (u, v, w) with rank(u) < rank(v) < rank(w).
    Cached on the (immutable) graph; several statistics share the result.
    """
    if g._tri_cache is not None:
        return g._tri_cache
    indptr, neighbors, und_u, und_v = g.undirected_adjacency()
    n = g.node_count
    deg = np.diff(indptr)
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), deg))] = np.arange(n)

    lo = np.where(rank[und_u] < rank[und_v], und_u, und_v)
    hi = np.where(rank[und_u] < rank[und_v], und_v, und_u)
    order = np.argsort(lo, kind="stable")
    fwd_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(lo, minlength=n), out=fwd_indptr[1:])
    fwd = hi[order]
    fwd_deg = np.diff(fwd_indptr)
    # sort each forward list by rank so intersections can assume order
    for v in np.flatnonzero(fwd_deg > 1):
        s, e = fwd_indptr[v], fwd_indptr[v + 1]
        seg = fwd[s:e]
        fwd[s:e] = seg[np.argsort(rank[seg], kind="stable")]

    out: list[tuple[int, int, int]] = []
    for u in np.flatnonzero(fwd_deg >= 2):
        s, e = fwd_indptr[u], fwd_indptr[u + 1]
        fu = fwd[s:e]
        fu_set = set(fu.tolist())
        for j in range(e - s):
            v = fu[j]
            vs, ve = fwd_indptr[v], fwd_indptr[v + 1]
            if ve == vs:
                continue
            for w in fwd[vs:ve]:
                if w in fu_set:
                    out.append((u, int(v), int(w)))
    result = np.array(out, dtype=np.int64) if out else np.empty((0, 3), dtype=np.int64)
    result.flags.writeable = False
    g._tri_cache = result
    return result
