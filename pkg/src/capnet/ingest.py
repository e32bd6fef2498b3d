"""CSV parsing, duplicate-link reconciliation, and network scope filters.

File formats (UTF-8, comma-separated, header row, LF or CRLF):

    nodes: id,kind,naics,assets,wages
    edges: parent_id,child_id,share_pct,source

``share_pct`` is a percentage (50 = half ownership); it is stored as a
fraction. Optional columns may be left empty.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .components import extract_gcc
from .errors import InputError
from .graph import EntityGraph
from .records import (
    BUSINESS_KINDS,
    EdgeRecord,
    EdgeSource,
    NodeKind,
    NodeRecord,
    ParseStats,
    merge_duplicate_edges,
)

NODE_HEADER = ["id", "kind", "naics", "assets", "wages"]
EDGE_HEADER = ["parent_id", "child_id", "share_pct", "source"]

_KIND_LOOKUP = {k.value: k for k in NodeKind}
_SOURCE_LOOKUP = {s.value: s for s in EdgeSource}

#: NAICS sectors for finance, insurance, and real estate.
FIRE_SECTORS = ("52", "53")


@dataclass(frozen=True)
class NetworkScope:
    """Which slice of the raw network to measure."""

    include_kinds: frozenset[NodeKind] = field(default_factory=lambda: frozenset(BUSINESS_KINDS))
    exclude_fire: bool = False
    gcc_only: bool = False

    def __post_init__(self):
        if not self.include_kinds:
            raise InputError("NetworkScope.include_kinds must be nonempty")

    @classmethod
    def named(cls, name: str, gcc_only: bool = False) -> "NetworkScope":
        """The scopes used as robustness variants: entities, all, no-fire."""
        if name == "entities":
            return cls(frozenset(BUSINESS_KINDS), False, gcc_only)
        if name == "all":
            return cls(frozenset(NodeKind), False, gcc_only)
        if name == "no-fire":
            return cls(frozenset(BUSINESS_KINDS), True, gcc_only)
        raise InputError(f"unknown scope {name!r} (want entities|all|no-fire)")

    def describe(self) -> dict:
        return {
            "include_kinds": sorted(k.value for k in self.include_kinds),
            "exclude_fire": self.exclude_fire,
            "gcc_only": self.gcc_only,
        }


def _open_text(source: str | Path | BinaryIO | io.TextIOBase):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8-sig", newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline=""), False


def _check_header(row: list[str] | None, expected: list[str], what: str) -> None:
    if row is None:
        raise InputError(f"{what} file is empty (missing header)")
    got = [c.strip().lower() for c in row]
    if got != expected:
        raise InputError(f"bad {what} header {row!r}, expected {','.join(expected)}")


def _parse_money(text: str, name: str, row: int) -> float | None:
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"bad {name} value {text!r}", row=row) from None
    if not np.isfinite(value) or value < 0:
        raise InputError(f"{name} must be finite and >= 0, got {text!r}", row=row)
    return value


def parse_nodes_csv(
    source: str | Path | BinaryIO | io.TextIOBase, stats: ParseStats | None = None
) -> list[NodeRecord]:
    """Read node records; unknown kinds map to 'other' with a warning count."""
    if stats is None:
        stats = ParseStats()
    stream, owned = _open_text(source)
    try:
        reader = csv.reader(stream)
        _check_header(next(reader, None), NODE_HEADER, "nodes")
        records: list[NodeRecord] = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(NODE_HEADER):
                raise InputError(f"expected {len(NODE_HEADER)} fields, got {len(row)}", row=row_no)
            node_id, kind_raw, naics, assets_raw, wages_raw = (c.strip() for c in row)
            if not node_id:
                raise InputError("empty node id", row=row_no)
            if node_id in seen:
                raise InputError(f"duplicate node id {node_id!r}", row=row_no)
            seen.add(node_id)
            kind = _KIND_LOOKUP.get(kind_raw.lower())
            if kind is None:
                kind = NodeKind.OTHER
                stats.unknown_kinds += 1
            rec = NodeRecord(
                id=sys.intern(node_id),
                kind=kind,
                naics=naics or None,
                assets=_parse_money(assets_raw, "assets", row_no),
                wages=_parse_money(wages_raw, "wages", row_no),
            )
            rec.validate(row=row_no)
            records.append(rec)
        return records
    finally:
        if owned:
            stream.close()


def parse_edges_csv(
    source: str | Path | BinaryIO | io.TextIOBase, stats: ParseStats | None = None
) -> list[EdgeRecord]:
    """Read edge records; share_pct (percent) becomes a fraction in (0, 2]."""
    if stats is None:
        stats = ParseStats()
    stream, owned = _open_text(source)
    try:
        reader = csv.reader(stream)
        _check_header(next(reader, None), EDGE_HEADER, "edges")
        records: list[EdgeRecord] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EDGE_HEADER):
                raise InputError(f"expected {len(EDGE_HEADER)} fields, got {len(row)}", row=row_no)
            parent_id, child_id, pct_raw, source_raw = (c.strip() for c in row)
            if not parent_id or not child_id:
                raise InputError("empty parent_id or child_id", row=row_no)
            if parent_id == child_id:
                raise InputError(f"self-loop on {parent_id!r}", row=row_no)
            share = None
            if pct_raw:
                try:
                    pct = float(pct_raw)
                except ValueError:
                    raise InputError(f"bad share_pct {pct_raw!r}", row=row_no) from None
                if not np.isfinite(pct) or pct <= 0 or pct > 200:
                    raise InputError(f"share_pct {pct_raw!r} outside (0, 200]", row=row_no)
                share = pct / 100.0
            if source_raw:
                src = _SOURCE_LOOKUP.get(source_raw.lower())
                if src is None:
                    raise InputError(f"unknown source {source_raw!r}", row=row_no)
            else:
                src = EdgeSource.MERGED
            records.append(
                EdgeRecord(sys.intern(parent_id), sys.intern(child_id), share, src)
            )
        return records
    finally:
        if owned:
            stream.close()


def dedupe_edges(edges: list[EdgeRecord], stats: ParseStats | None = None) -> list[EdgeRecord]:
    """Collapse redundantly reported links to one record per (parent, child).

    Idempotent; see :func:`capnet.records.merge_duplicate_edges` for the share
    reconciliation rule and the discrepancy counter.
    """
    return merge_duplicate_edges(edges, stats)


def filter_network(g: EntityGraph, scope: NetworkScope) -> EntityGraph:
    """Apply a scope: kind filter, optional FIRE exclusion, drop isolated nodes,
    optionally restrict to the giant connected component.

    An empty result is returned as an empty graph (``g.is_empty``), not an
    error, so callers can report it as a structured skip.
    """
    from .records import KIND_CODES

    if g.is_empty:
        return g
    keep_codes = np.zeros(len(KIND_CODES), dtype=bool)
    for kind in scope.include_kinds:
        keep_codes[KIND_CODES[kind]] = True
    keep = keep_codes[g.kinds]

    if scope.exclude_fire:
        fire = np.fromiter(
            (
                code is not None and code.startswith(FIRE_SECTORS)
                for code in g.naics
            ),
            dtype=bool,
            count=g.node_count,
        )
        keep &= ~fire

    sub = g.induced_subgraph(keep)
    # every reported statistic is over nodes with at least one link
    has_edge = (sub.out_degrees + sub.in_degrees) > 0
    if not has_edge.all():
        sub = sub.induced_subgraph(has_edge)
    if sub.is_empty or sub.edge_count == 0:
        return sub.induced_subgraph(np.zeros(sub.node_count, dtype=bool))
    if scope.gcc_only:
        sub = extract_gcc(sub)
    return sub
