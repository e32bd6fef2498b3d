"""Share-weighted consolidation of entity financials up ownership chains.

Each node's consolidated value is its own reported value plus the
share-weighted consolidated values of its children, recursively:

    C(v) = m(v) + sum over children c of share(v, c) * C(c)

On a DAG this is computed exactly in reverse topological order (children
before parents, processed level by level). When cycles are present the same
system is solved by synchronous fixed-point sweeps, which converges as long
as every cycle's share product stays below one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import strong_components
from .errors import EstimationError, InputError
from .graph import EntityGraph

RESIDUAL_TOL = 1e-9
MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class ConsolidatedMeasure:
    values: np.ndarray
    measure: str  # assets | wages
    convergence: str  # exact_dag | iterative
    residual: float
    missing_share_policy: str
    #: children whose inbound shares sum above 1 (used as-is, flagged for audit)
    over_unity_children: np.ndarray

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "convergence": self.convergence,
            "residual": self.residual,
            "missing_share_policy": self.missing_share_policy,
            "over_unity_children": self.over_unity_children.astype(int).tolist(),
            "total_entity": float(np.nansum(self.values)),
        }


def _effective_shares(g: EntityGraph, policy: str) -> tuple[np.ndarray, np.ndarray]:
    """Resolve missing shares; returns (shares, over-unity child indices).

    equal_split: a child's unreported inbound fraction (1 minus the sum of its
    reported inbound shares, floored at 0) is split equally over its
    shareless parents. skip: shareless edges contribute nothing.
    """
    shares = g.shares.copy()
    missing = np.isnan(shares)
    if policy == "skip":
        shares[missing] = 0.0
    elif policy == "equal_split":
        known = np.where(missing, 0.0, shares)
        known_sum = np.bincount(g.children, weights=known, minlength=g.node_count)
        missing_cnt = np.bincount(
            g.children[missing], minlength=g.node_count
        ).astype(np.float64)
        unassigned = np.maximum(0.0, 1.0 - known_sum)
        with np.errstate(divide="ignore", invalid="ignore"):
            fill = np.where(missing_cnt > 0, unassigned / missing_cnt, 0.0)
        shares[missing] = fill[g.children[missing]]
    else:
        raise InputError(f"unknown missing_share_policy {policy!r} (want equal_split|skip)")

    inbound = np.bincount(g.children, weights=shares, minlength=g.node_count)
    over = np.flatnonzero(inbound > 1.0 + 1e-9)
    return shares, over


def consolidate(
    g: EntityGraph,
    measure: str,
    missing_share_policy: str = "equal_split",
    method: str = "auto",
    residual_tol: float = RESIDUAL_TOL,
) -> ConsolidatedMeasure:
    """Propagate assets or wages up ownership links in proportion to shares.

    ``method`` forces the solver ("topo" requires a DAG, "iterative" always
    sweeps); "auto" picks topological order and falls back to iteration when
    cycles are present. Missing node values count as zero.
    """
    if measure == "assets":
        own = g.assets
    elif measure == "wages":
        own = g.wages
    else:
        raise InputError(f"unknown measure {measure!r} (want assets|wages)")
    if not np.any(~np.isnan(own)):
        raise EstimationError(f"no node reports a value for {measure}")
    m = np.where(np.isnan(own), 0.0, own)
    shares, over = _effective_shares(g, missing_share_policy)

    values, convergence, residual = _solve(g, m, shares, method, residual_tol)
    return ConsolidatedMeasure(
        values=values,
        measure=measure,
        convergence=convergence,
        residual=residual,
        missing_share_policy=missing_share_policy,
        over_unity_children=over,
    )


def _solve(g, m, shares, method, residual_tol):
    n = g.node_count
    if n == 0:
        return np.zeros(0), "exact_dag", 0.0

    if method not in ("auto", "topo", "iterative"):
        raise InputError(f"unknown method {method!r}")

    if method in ("auto", "topo"):
        values, done = _topological_pass(g, m, shares)
        if done:
            return values, "exact_dag", 0.0
        if method == "topo":
            raise InputError("graph has cycles; topological consolidation needs a DAG")
    return _iterative_pass(g, m, shares, residual_tol)


def _topological_pass(g, m, shares):
    """Reverse topological (children-first) level sweep; fails on cycles."""
    n = g.node_count
    values = m.astype(np.float64).copy()
    remaining = g.out_degrees.astype(np.int64).copy()
    level = np.flatnonzero(remaining == 0)
    # in-CSR arrays: for each resolved child, push value to its parents
    while level.size:
        starts = g._in_indptr[level]
        ends = g._in_indptr[level + 1]
        counts = ends - starts
        idx = np.repeat(starts, counts) + _ranges(counts)
        parents = g._in_parents[idx]
        eids = g._in_eids[idx]
        contrib = shares[eids] * np.repeat(values[level], counts)
        np.add.at(values, parents, contrib)
        np.subtract.at(remaining, parents, 1)
        level = np.unique(parents[remaining[parents] == 0])
    done = not np.any(remaining > 0)
    return values, done


def _ranges(counts: np.ndarray) -> np.ndarray:
    """[0..counts[0]-1, 0..counts[1]-1, ...] for CSR gather patterns."""
    total = int(counts.sum())
    out = np.arange(total, dtype=np.int64)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    return out - offsets


def _iterative_pass(g, m, shares, residual_tol):
    scale = float(np.abs(m).sum()) or 1.0
    values = m.astype(np.float64).copy()
    prev_residual = np.inf
    stalled = 0
    for _ in range(MAX_SWEEPS):
        pushed = np.bincount(
            g.parents, weights=shares * values[g.children], minlength=g.node_count
        )
        new_values = m + pushed
        residual = float(np.abs(new_values - values).sum())
        values = new_values
        if residual < residual_tol * scale:
            return values, "iterative", residual
        # a contracting system shrinks the residual geometrically; any run of
        # non-shrinking sweeps means some cycle's share product has reached 1
        if not np.isfinite(residual) or residual >= prev_residual * (1 - 1e-12):
            stalled += 1
            if stalled >= 5 or not np.isfinite(residual):
                raise EstimationError(
                    "consolidation diverges: a cycle's share product reaches 1 "
                    f"(nodes {_divergent_cycle_nodes(g, shares)})"
                )
        else:
            stalled = 0
        prev_residual = residual
    raise EstimationError(
        "consolidation did not converge within the sweep limit "
        f"(suspect cycles around nodes {_divergent_cycle_nodes(g, shares)})"
    )


def _divergent_cycle_nodes(g: EntityGraph, shares: np.ndarray) -> list[str]:
    """Name nodes of strongly connected components that can hold a cycle."""
    labeling = strong_components(g)
    bad = np.flatnonzero(labeling.sizes >= 2)
    nodes: list[str] = []
    for comp in bad[:3]:
        members = np.flatnonzero(labeling.labels == comp)[:8]
        nodes.extend(g.ids[int(v)] for v in members)
    return nodes
