"""Degree sequences, complementary CDF tables, and the six-measure size
correlation matrix (out/in degree, entity and consolidated assets/wages)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import EstimationError
from .graph import EntityGraph

if TYPE_CHECKING:
    from .consolidation import ConsolidatedMeasure


@dataclass(frozen=True)
class DegreeSample:
    """Multiset of positive link counts for one direction."""

    values: np.ndarray
    direction: str  # "in" or "out"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.size and values.min() < 1:
            raise EstimationError("degree sample must contain only positive values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.values)

    def value_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """(sorted distinct values, counts) — the histogram view used by fitting."""
        return np.unique(self.values, return_counts=True)


@dataclass(frozen=True)
class CcdfTable:
    """P(X >= k) at each distinct k, for log-log plotting.

    k is strictly increasing, ccdf non-increasing, and ccdf = 1 at the
    smallest value.
    """

    ks: np.ndarray
    ccdf: np.ndarray

    def rows(self) -> list[tuple[int, float]]:
        return [(int(k), float(c)) for k, c in zip(self.ks, self.ccdf)]

    def to_tsv(self) -> str:
        lines = ["k\tccdf"]
        lines += [f"{int(k)}\t{float(c)!r}" for k, c in zip(self.ks, self.ccdf)]
        return "\n".join(lines) + "\n"

    def loglog_slope(self) -> float:
        """OLS slope of ln(ccdf) against ln(k) over the table rows."""
        x = np.log(self.ks.astype(np.float64))
        y = np.log(self.ccdf)
        x = x - x.mean()
        return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def degree_sequences(g: EntityGraph) -> tuple[DegreeSample, DegreeSample]:
    """(out sample, in sample), zero-degree nodes excluded."""
    if g.edge_count == 0:
        raise EstimationError("graph has no edges; degree sequences undefined")
    out_deg = g.out_degrees
    in_deg = g.in_degrees
    return (
        DegreeSample(out_deg[out_deg >= 1], "out"),
        DegreeSample(in_deg[in_deg >= 1], "in"),
    )


def ccdf(sample: DegreeSample) -> CcdfTable:
    if sample.n == 0:
        raise EstimationError("empty sample has no CCDF")
    values, counts = sample.value_counts()
    # suffix sums: number of observations >= k
    tail = np.cumsum(counts[::-1])[::-1]
    return CcdfTable(values, tail / sample.n)


_MEASURE_LABELS = ("d_out", "d_in", "assets", "assets_consolidated", "wages", "wages_consolidated")


@dataclass(frozen=True)
class SizeCorrelation:
    labels: tuple[str, ...]
    matrix: np.ndarray  # NaN where undefined
    n_obs: np.ndarray  # joint observation counts per pair

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": [
                [None if np.isnan(v) else float(v) for v in row] for row in self.matrix
            ],
            "n_obs": self.n_obs.astype(int).tolist(),
        }


def size_correlation_matrix(
    g: EntityGraph,
    consolidated_assets: "ConsolidatedMeasure",
    consolidated_wages: "ConsolidatedMeasure",
) -> SizeCorrelation:
    """Pearson correlations among ln(1+x)-transformed size measures.

    Pairs are computed over nodes where both raw measures are observed
    (degrees are always observed; assets/wages only where reported, and the
    consolidated variants inherit the entity-level observation mask). Entries
    with fewer than 3 joint observations are NaN.
    """
    n = g.node_count
    columns = [
        g.out_degrees.astype(np.float64),
        g.in_degrees.astype(np.float64),
        g.assets,
        consolidated_assets.values,
        g.wages,
        consolidated_wages.values,
    ]
    observed = [
        np.ones(n, dtype=bool),
        np.ones(n, dtype=bool),
        ~np.isnan(g.assets),
        ~np.isnan(g.assets),
        ~np.isnan(g.wages),
        ~np.isnan(g.wages),
    ]
    logs = [np.log1p(np.where(np.isnan(c), 0.0, c)) for c in columns]

    k = len(columns)
    matrix = np.full((k, k), np.nan)
    counts = np.zeros((k, k), dtype=np.int64)
    np.fill_diagonal(matrix, 1.0)
    np.fill_diagonal(counts, n)
    for i in range(k):
        for j in range(i + 1, k):
            mask = observed[i] & observed[j]
            m = int(mask.sum())
            counts[i, j] = counts[j, i] = m
            if m < 3:
                continue
            x = logs[i][mask]
            y = logs[j][mask]
            sx = x.std()
            sy = y.std()
            if sx == 0 or sy == 0:
                continue
            r = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
            matrix[i, j] = matrix[j, i] = r
    return SizeCorrelation(_MEASURE_LABELS, matrix, counts)
