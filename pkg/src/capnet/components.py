"""Weakly connected components, GCC extraction, industry subnetworks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import InputError
from .graph import EntityGraph


@dataclass(frozen=True)
class ComponentLabeling:
    """Per-node component labels; the GCC is the largest (ties: smallest label)."""

    labels: np.ndarray
    sizes: np.ndarray  # indexed by label
    gcc_id: int

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def gcc_size(self) -> int:
        return int(self.sizes[self.gcc_id]) if self.count else 0


def _adjacency(g: EntityGraph) -> csr_matrix:
    n = g.node_count
    data = np.ones(g.edge_count, dtype=np.int8)
    return csr_matrix((data, (g.parents, g.children)), shape=(n, n))


def connected_components(g: EntityGraph) -> ComponentLabeling:
    """Label weak components (edge directions ignored) in O(V + E)."""
    if g.is_empty:
        return ComponentLabeling(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), -1)
    n_comp, labels = _cc(_adjacency(g), directed=True, connection="weak")
    labels = labels.astype(np.int64)
    sizes = np.bincount(labels, minlength=n_comp)
    gcc_id = int(np.argmax(sizes))  # argmax returns the smallest label on ties
    return ComponentLabeling(labels, sizes, gcc_id)


def strong_components(g: EntityGraph) -> ComponentLabeling:
    """Strongly connected component labels (internal use: cycle counting)."""
    if g.is_empty:
        return ComponentLabeling(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), -1)
    n_comp, labels = _cc(_adjacency(g), directed=True, connection="strong")
    labels = labels.astype(np.int64)
    sizes = np.bincount(labels, minlength=n_comp)
    gcc_id = int(np.argmax(sizes))
    return ComponentLabeling(labels, sizes, gcc_id)


def extract_gcc(g: EntityGraph) -> EntityGraph:
    """Induced subgraph on the giant connected component."""
    if g.is_empty:
        return g
    labeling = connected_components(g)
    return g.induced_subgraph(labeling.labels == labeling.gcc_id)


def percent_in_gcc(g: EntityGraph, labeling: ComponentLabeling | None = None) -> float:
    """GCC nodes as a fraction of nodes with at least one link."""
    if g.is_empty:
        return float("nan")
    if labeling is None:
        labeling = connected_components(g)
    linked = int(np.count_nonzero((g.out_degrees + g.in_degrees) > 0))
    if linked == 0:
        return float("nan")
    return labeling.gcc_size / linked


#: 2-digit NAICS sectors grouped as single industries.
_SECTOR_GROUPS = ({"31", "32", "33"}, {"44", "45"}, {"48", "49"})


@dataclass(frozen=True)
class IndustrySubnetwork:
    graph: EntityGraph
    #: fraction of subnetwork nodes whose own NAICS matches the prefix
    match_fraction: float
    prefixes: tuple[str, ...]


def industry_subnetwork(g: EntityGraph, naics_prefix: str) -> IndustrySubnetwork:
    """Subnetwork of edges where either endpoint's NAICS starts with the prefix.

    Two-digit prefixes inside the range sectors 31-33, 44-45, 48-49 expand to
    the whole range. The node set is the endpoints of the selected edges; the
    match fraction reports how many of those nodes carry the prefix
    themselves.
    """
    if not naics_prefix.isdigit() or not (2 <= len(naics_prefix) <= 6):
        raise InputError(f"bad NAICS prefix {naics_prefix!r} (want 2-6 digits)")
    prefixes: tuple[str, ...] = (naics_prefix,)
    if len(naics_prefix) == 2:
        for group in _SECTOR_GROUPS:
            if naics_prefix in group:
                prefixes = tuple(sorted(group))
                break

    if g.is_empty:
        return IndustrySubnetwork(g, float("nan"), prefixes)
    matches = np.fromiter(
        (code is not None and code.startswith(prefixes) for code in g.naics),
        dtype=bool,
        count=g.node_count,
    )
    edge_mask = matches[g.parents] | matches[g.children]
    sub = g.subgraph_from_edges(edge_mask)
    if sub.is_empty:
        return IndustrySubnetwork(sub, float("nan"), prefixes)
    sub_matches = np.fromiter(
        (code is not None and code.startswith(prefixes) for code in sub.naics),
        dtype=bool,
        count=sub.node_count,
    )
    return IndustrySubnetwork(sub, float(sub_matches.mean()), prefixes)
