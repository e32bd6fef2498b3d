import numpy as np
import pytest

from capnet.graph import EntityGraph
from capnet.records import EdgeRecord, EdgeSource, NodeKind, NodeRecord


def graph_from_edges(edges, n=None, shares=None, assets=None, wages=None):
    """Small-graph helper: edges as (parent, child) index pairs."""
    edges = list(edges)
    if n is None:
        n = 1 + max((max(u, v) for u, v in edges), default=0)
    parents = np.array([u for u, _ in edges], dtype=np.int64)
    children = np.array([v for _, v in edges], dtype=np.int64)
    g = EntityGraph.from_arrays(parents, children, n, shares=shares)
    if assets is None and wages is None:
        return g
    return EntityGraph(
        list(g.ids),
        g.kinds.copy(),
        list(g.naics),
        np.asarray(assets, dtype=np.float64) if assets is not None else g.assets.copy(),
        np.asarray(wages, dtype=np.float64) if wages is not None else g.wages.copy(),
        g.parents.copy(),
        g.children.copy(),
        g.shares.copy(),
    )


def node(nid, kind=NodeKind.TB_PARTNERSHIP, naics=None, assets=None, wages=None):
    return NodeRecord(id=nid, kind=kind, naics=naics, assets=assets, wages=wages)


def edge(parent, child, share=None, source=EdgeSource.MERGED):
    return EdgeRecord(parent_id=parent, child_id=child, share=share, source=source)


@pytest.fixture
def tiny_star():
    """P owns C1..C5."""
    return graph_from_edges([(0, i) for i in range(1, 6)])
