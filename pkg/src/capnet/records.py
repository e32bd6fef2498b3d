"""Raw node and edge records as read from CSV, plus duplicate-link merging.

An ownership link can be reported from both sides (the parent lists its
child, the child lists its parent), so the same (parent, child) pair may
appear twice with possibly different share values. ``merge_duplicate_edges``
collapses those into a single record per ordered pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import InputError


class NodeKind(Enum):
    TB_PARTNERSHIP = "tb_partnership"
    NONTB_PARTNERSHIP = "nontb_partnership"
    S_CORP = "s_corp"
    C_CORP = "c_corp"
    REIT = "reit"
    PERSON = "person"
    TRUST_ESTATE = "trust_estate"
    NONPROFIT = "nonprofit"
    FOREIGN = "foreign"
    OTHER = "other"


#: Kinds treated as U.S. business entities for the default network scope.
BUSINESS_KINDS = frozenset(
    {
        NodeKind.TB_PARTNERSHIP,
        NodeKind.NONTB_PARTNERSHIP,
        NodeKind.S_CORP,
        NodeKind.C_CORP,
        NodeKind.REIT,
    }
)

#: Integer codes for compact storage inside EntityGraph.
KIND_CODES = {kind: i for i, kind in enumerate(NodeKind)}
KIND_FROM_CODE = {i: kind for kind, i in KIND_CODES.items()}


class EdgeSource(Enum):
    PARENT_REPORT = "parent_report"
    CHILD_REPORT = "child_report"
    MERGED = "merged"


@dataclass(frozen=True, slots=True)
class NodeRecord:
    id: str
    kind: NodeKind
    naics: str | None = None
    assets: float | None = None
    wages: float | None = None

    def validate(self, row: int | None = None) -> None:
        if not self.id:
            raise InputError("node id is empty", row=row)
        if self.naics is not None:
            if not self.naics.isdigit() or not (2 <= len(self.naics) <= 6):
                raise InputError(f"bad NAICS code {self.naics!r} (want 2-6 digits)", row=row)
        for name, value in (("assets", self.assets), ("wages", self.wages)):
            if value is not None and not (value >= 0 and value == value and value != float("inf")):
                raise InputError(f"{name} must be finite and >= 0, got {value!r}", row=row)


@dataclass(frozen=True, slots=True)
class EdgeRecord:
    parent_id: str
    child_id: str
    share: float | None = None  # fraction of the child owned, in (0, 2]
    source: EdgeSource = EdgeSource.MERGED

    def validate(self, row: int | None = None) -> None:
        if self.parent_id == self.child_id:
            raise InputError(f"self-loop on {self.parent_id!r}", row=row)
        if self.share is not None and not (0.0 < self.share <= 2.0):
            raise InputError(f"share {self.share!r} outside (0, 2]", row=row)


@dataclass
class ParseStats:
    """Counters accumulated during parsing and merging."""

    unknown_kinds: int = 0
    share_discrepancies: int = 0
    over_share_edges: int = 0
    merged_duplicates: int = 0
    warnings: list[str] = field(default_factory=list)


def merge_duplicate_edges(
    edges: list[EdgeRecord], stats: ParseStats | None = None
) -> list[EdgeRecord]:
    """Collapse duplicate (parent, child) pairs into one merged record.

    Share reconciliation: if both sides report a share and they differ, the
    child-side value wins (child filings state the parent's share of the
    child directly) and a discrepancy is counted. If only one side reports a
    share, that value is kept. The merged record always has source=MERGED.
    Output order follows first appearance of each pair, so merging is stable.
    """
    if stats is None:
        stats = ParseStats()
    merged: dict[tuple[str, str], EdgeRecord] = {}
    for rec in edges:
        key = (rec.parent_id, rec.child_id)
        prev = merged.get(key)
        if prev is None:
            merged[key] = rec
            continue
        stats.merged_duplicates += 1
        share = _reconcile_share(prev, rec, stats)
        merged[key] = EdgeRecord(rec.parent_id, rec.child_id, share, EdgeSource.MERGED)
    out = []
    for rec in merged.values():
        if rec.source is not EdgeSource.MERGED:
            rec = EdgeRecord(rec.parent_id, rec.child_id, rec.share, EdgeSource.MERGED)
        if rec.share is not None and rec.share > 1.0:
            stats.over_share_edges += 1
        out.append(rec)
    return out


def _reconcile_share(a: EdgeRecord, b: EdgeRecord, stats: ParseStats) -> float | None:
    if a.share is None:
        return b.share
    if b.share is None:
        return a.share
    if a.share == b.share:
        return a.share
    stats.share_discrepancies += 1
    # Prefer the child-side report; fall back to the later record when the
    # colliding pair does not include a child_report.
    for rec in (b, a):
        if rec.source is EdgeSource.CHILD_REPORT:
            return rec.share
    return b.share
