"""Seeded synthetic samples and graphs with known ground truth.

Every generator is a pure function of its parameters and seed, so estimator
tests can freeze expected values. The directed scale-free generator's
limiting degree exponents are known in closed form, which gives fit-recovery
targets that do not depend on the estimator under test.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .degree_stats import DegreeSample
from .errors import InputError
from .graph import EntityGraph
from .powerlaw import ZetaSampler


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def gen_discrete_power_law(
    n: int,
    gamma: float,
    xmin: int = 1,
    seed: int = 0,
    direction: str = "out",
    cap: int = 2_000_000,
) -> DegreeSample:
    """IID draws with P(X = k) proportional to k^-gamma for k >= xmin.

    Inverse-CDF sampling over an exact zeta table (cumulative to 1 - 1e-12;
    if the table hits ``cap`` entries first, the leftover mass is lumped at
    the cap and recorded on the sampler).
    """
    if n < 1:
        raise InputError(f"need n >= 1 draws, got {n}")
    sampler = ZetaSampler(gamma, xmin, cap=cap)
    values = sampler.sample(n, _rng(seed))
    return DegreeSample(values, direction)


@dataclass(frozen=True)
class ScaleFreeParams:
    """Directed preferential-attachment growth parameters.

    Each step adds one edge: with probability ``p_new_source`` a brand-new
    source node points to an existing target; with probability
    ``p_new_target`` an existing source points to a brand-new target;
    otherwise both endpoints are existing nodes. Existing targets are chosen
    proportional to in-degree + ``offset_in``, existing sources proportional
    to out-degree + ``offset_out``.
    """

    p_new_source: float
    p_new_target: float
    offset_in: float = 0.0
    offset_out: float = 0.0

    def __post_init__(self):
        if not (0 <= self.p_new_source <= 1 and 0 <= self.p_new_target <= 1):
            raise InputError("probabilities must lie in [0, 1]")
        if self.p_new_source + self.p_new_target > 1 + 1e-12:
            raise InputError("p_new_source + p_new_target must not exceed 1")
        if self.offset_in < 0 or self.offset_out < 0:
            raise InputError("offsets must be nonnegative")

    @property
    def predicted_in_exponent(self) -> float:
        """Limiting power-law exponent of the in-degree distribution."""
        a, c = self.p_new_source, self.p_new_target
        b = 1.0 - a - c
        return 1.0 + (1.0 + self.offset_in * (a + c)) / (a + b)

    @property
    def predicted_out_exponent(self) -> float:
        """Limiting power-law exponent of the out-degree distribution."""
        a, c = self.p_new_source, self.p_new_target
        b = 1.0 - a - c
        return 1.0 + (1.0 + self.offset_out * (a + c)) / (b + c)


def gen_directed_scale_free(
    n_edges: int, params: ScaleFreeParams, seed: int = 0
) -> EntityGraph:
    """Grow a directed graph one edge per step; heavy-tailed in/out degrees.

    Repeated (source, target) picks merge at build time, so the final edge
    count can be slightly below ``n_edges``.
    """
    if n_edges < 1:
        raise InputError(f"need n_edges >= 1, got {n_edges}")
    rng = _rng(seed)
    src = np.empty(n_edges, dtype=np.int64)
    dst = np.empty(n_edges, dtype=np.int64)

    # endpoint lists double as degree-proportional samplers
    in_ends: list[int] = []
    out_ends: list[int] = []
    n_nodes = 1  # seed node 0
    d_in = params.offset_in
    d_out = params.offset_out
    a, c = params.p_new_source, params.p_new_target

    CHUNK = 65536
    buf = rng.random(CHUNK * 4)
    pos = 0

    def draw() -> float:
        nonlocal buf, pos
        if pos >= len(buf):
            buf = rng.random(CHUNK * 4)
            pos = 0
        val = buf[pos]
        pos += 1
        return val

    def pick_target() -> int:
        total = len(in_ends)
        if total == 0 or (d_in > 0 and draw() >= total / (total + d_in * n_nodes)):
            return int(draw() * n_nodes)
        return in_ends[int(draw() * total)]

    def pick_source() -> int:
        total = len(out_ends)
        if total == 0 or (d_out > 0 and draw() >= total / (total + d_out * n_nodes)):
            return int(draw() * n_nodes)
        return out_ends[int(draw() * total)]

    for step in range(n_edges):
        r = draw()
        new_src = r < a
        new_dst = (not new_src) and r < a + c
        if not new_src and not new_dst and n_nodes < 2:
            new_src = True  # a lone seed node cannot host an existing-existing edge

        if new_src:
            v = pick_target()
            u = n_nodes
            n_nodes += 1
        elif new_dst:
            u = pick_source()
            v = n_nodes
            n_nodes += 1
        else:
            v = pick_target()
            u = pick_source()
            for _ in range(64):
                if u != v:
                    break
                u = pick_source()
            else:
                u = v - 1 if v > 0 else v + 1  # dense corner case: force a non-loop
        src[step] = u
        dst[step] = v
        out_ends.append(u)
        in_ends.append(v)

    return EntityGraph.from_arrays(src, dst, n_nodes)


def gen_random_tree(n: int, seed: int = 0) -> EntityGraph:
    """Uniform random recursive tree, edges directed parent -> child."""
    if n < 1:
        raise InputError(f"need n >= 1 nodes, got {n}")
    if n == 1:
        return EntityGraph.from_arrays(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), 1)
    rng = _rng(seed)
    children = np.arange(1, n, dtype=np.int64)
    parents = (rng.random(n - 1) * children).astype(np.int64)
    return EntityGraph.from_arrays(parents, children, n)


def gen_er_digraph(n: int, p: float, seed: int = 0) -> EntityGraph:
    """Independent-edge digraph without self-loops (desk-scale oracle graphs)."""
    if n < 1:
        raise InputError(f"need n >= 1 nodes, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability must lie in [0, 1], got {p}")
    rng = _rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return EntityGraph.from_arrays(src.astype(np.int64), dst.astype(np.int64), n)


def attach_financials(
    g: EntityGraph,
    seed: int = 0,
    asset_scale: float = 1e5,
    wage_scale: float = 1e4,
    missing_rate: float = 0.1,
    naics_choices: tuple[str, ...] = ("5313", "5241", "5411", "6211", "2111", "3111", "4451"),
) -> EntityGraph:
    """Decorate a synthetic graph with lognormal assets/wages and NAICS codes.

    Gives end-to-end pipeline tests something for the consolidation and
    correlation stages to chew on; a ``missing_rate`` share of each financial
    column is left unreported.
    """
    rng = _rng(seed)
    n = g.node_count
    assets = asset_scale * rng.lognormal(0.0, 1.5, n)
    wages = wage_scale * rng.lognormal(0.0, 1.2, n)
    assets[rng.random(n) < missing_rate] = np.nan
    wages[rng.random(n) < missing_rate] = np.nan
    naics = [naics_choices[i] for i in rng.integers(0, len(naics_choices), n)]
    return EntityGraph(
        list(g.ids),
        g.kinds.copy(),
        naics,
        assets,
        wages,
        g.parents.copy(),
        g.children.copy(),
        g.shares.copy(),
        year=g.year,
    )


def write_network_csv(g: EntityGraph, nodes_path: str | Path, edges_path: str | Path) -> None:
    """Emit the graph in the ingest CSV formats (shares as percentages)."""
    from .ingest import EDGE_HEADER, NODE_HEADER
    from .records import KIND_FROM_CODE

    with open(nodes_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NODE_HEADER)
        for i in range(g.node_count):
            assets = g.assets[i]
            wages = g.wages[i]
            writer.writerow(
                [
                    g.ids[i],
                    KIND_FROM_CODE[int(g.kinds[i])].value,
                    g.naics[i] or "",
                    "" if math.isnan(assets) else f"{assets:.2f}",
                    "" if math.isnan(wages) else f"{wages:.2f}",
                ]
            )
    with open(edges_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EDGE_HEADER)
        for i in range(g.edge_count):
            share = g.shares[i]
            writer.writerow(
                [
                    g.ids[g.parents[i]],
                    g.ids[g.children[i]],
                    "" if math.isnan(share) else f"{share * 100:.4f}",
                    "merged",
                ]
            )
