"""Connected 3- and 4-node induced subgraph censuses, simple directed cycle
counts, and shortcut (multiple-path ownership) edges.

Triads are classified with the standard MAN labels (021D, 021U, 021C, 030T,
...). The census never enumerates open triads one by one: star counts around
each center come from closed-form pair counts, with per-triangle corrections,
so hub nodes with enormous neighborhoods stay cheap. 4-node classes are
canonical 12-bit adjacency masks (reported as 3-digit hex) found by ESU
enumeration, with seeded probabilistic ESU sampling above a budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterator

import numpy as np

from .components import strong_components
from .errors import InputError
from .graph import EntityGraph, triangles

# ordered vertex pairs backing the 6-bit (k=3) and 12-bit (k=4) edge masks
_PAIRS3 = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
_PAIRS4 = [(i, j) for i in range(4) for j in range(4) if i != j]
_BIT3 = {p: i for i, p in enumerate(_PAIRS3)}
_BIT4 = {p: i for i, p in enumerate(_PAIRS4)}
_REV3 = [_BIT3[(j, i)] for (i, j) in _PAIRS3]


def _triad_name(mask: int) -> str:
    """MAN label of a 3-node digraph given as a 6-bit mask over _PAIRS3."""
    e = [(mask >> b) & 1 for b in range(6)]
    dyads = [((0, 1), e[0], e[2]), ((0, 2), e[1], e[4]), ((1, 2), e[3], e[5])]
    m = sum(1 for _, a, b in dyads if a and b)
    a_cnt = sum(1 for _, a, b in dyads if a != b)
    base = f"{m}{a_cnt}{3 - m - a_cnt}"
    if base in ("003", "012", "102", "201", "210", "300"):
        return base
    out_deg = [0, 0, 0]
    in_deg = [0, 0, 0]
    for bit, (i, j) in enumerate(_PAIRS3):
        if e[bit]:
            out_deg[i] += 1
            in_deg[j] += 1
    if base == "021":
        if max(out_deg) == 2:
            return "021D"
        if max(in_deg) == 2:
            return "021U"
        return "021C"
    if base == "030":
        return "030C" if out_deg == [1, 1, 1] else "030T"
    if base == "111":
        pair = next(p for p, x, y in dyads if x and y)
        outsider = ({0, 1, 2} - set(pair)).pop()
        for bit, (i, j) in enumerate(_PAIRS3):
            if e[bit] and not e[_REV3[bit]]:
                return "111D" if i == outsider else "111U"
    if base == "120":
        pair = next(p for p, x, y in dyads if x and y)
        outsider = ({0, 1, 2} - set(pair)).pop()
        asym_out = sum(
            1
            for bit, (i, j) in enumerate(_PAIRS3)
            if e[bit] and not e[_REV3[bit]] and i == outsider
        )
        return {2: "120D", 0: "120U"}.get(asym_out, "120C")
    raise AssertionError(f"unclassifiable triad mask {mask:#x}")


TRIAD_NAME_BY_MASK = {mask: _triad_name(mask) for mask in range(64)}

#: the four triad classes a DAG without multiple paths can contain
DAG_TRIADS = ("021U", "021D", "021C", "030T")


def _perm_maps(pairs: list[tuple[int, int]], k: int) -> list[np.ndarray]:
    bit_of = {p: i for i, p in enumerate(pairs)}
    maps = []
    for perm in permutations(range(k)):
        maps.append(np.array([bit_of[(perm[i], perm[j])] for (i, j) in pairs]))
    return maps


_PERM_MAPS4 = _perm_maps(_PAIRS4, 4)
_canon4_memo: dict[int, int] = {}


def _canon4(mask: int) -> int:
    """Minimum 12-bit encoding over the 24 vertex permutations."""
    cached = _canon4_memo.get(mask)
    if cached is not None:
        return cached
    bits = [b for b in range(12) if (mask >> b) & 1]
    best = mask
    for pm in _PERM_MAPS4:
        remapped = 0
        for b in bits:
            remapped |= 1 << pm[b]
        if remapped < best:
            best = remapped
    _canon4_memo[mask] = best
    return best


def four_class_code(mask: int) -> str:
    return f"{_canon4(mask):03x}"


#: canonical class of the funnel motif: three parents all owning one child
FUNNEL_CLASS = four_class_code((1 << _BIT4[(1, 0)]) | (1 << _BIT4[(2, 0)]) | (1 << _BIT4[(3, 0)]))


@dataclass(frozen=True)
class MotifCensus:
    k: int
    counts: dict[str, float]
    excluded_funnel_share: float | None = None
    sampled: bool = False
    leaf_prob: float = 1.0

    @property
    def total(self) -> float:
        return float(sum(self.counts.values()))

    @property
    def shares(self) -> dict[str, float]:
        total = self.total
        if total == 0:
            return {code: 0.0 for code in self.counts}
        return {code: cnt / total for code, cnt in self.counts.items()}

    def to_dict(self) -> dict:
        ordered = dict(sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0])))
        return {
            "k": self.k,
            "counts": ordered,
            "shares": {c: self.shares[c] for c in ordered},
            "excluded_funnel_share": self.excluded_funnel_share,
            "sampled": self.sampled,
            "leaf_prob": self.leaf_prob,
        }


@dataclass(frozen=True)
class CycleReport:
    cycle_count: int
    truncated: bool
    cap: int

    def to_dict(self) -> dict:
        return {"cycle_count": self.cycle_count, "truncated": self.truncated, "cap": self.cap}


@dataclass(frozen=True)
class ShortcutStats:
    count: int
    ratio: float
    depth_bound: int | None

    def to_dict(self) -> dict:
        return {"count": self.count, "ratio": self.ratio, "depth_bound": self.depth_bound}


# -- triad census -------------------------------------------------------------


def _edge_codes(g: EntityGraph) -> np.ndarray:
    return g.parents * np.int64(max(g.node_count, 1)) + g.children


def _has_edges(g: EntityGraph, us: np.ndarray, vs: np.ndarray, codes: np.ndarray) -> np.ndarray:
    if len(codes) == 0:
        return np.zeros(len(us), dtype=bool)
    q = us.astype(np.int64) * np.int64(max(g.node_count, 1)) + vs
    pos = np.searchsorted(codes, q)
    ok = pos < len(codes)
    out = np.zeros(len(q), dtype=bool)
    out[ok] = codes[pos[ok]] == q[ok]
    return out


def triad_census(g: EntityGraph) -> MotifCensus:
    """Counts of all connected induced 3-node subgraph classes.

    Open triads (center with two non-adjacent neighbors) are counted in
    closed form per center from its out-only/in-only/mutual neighbor counts;
    triangles are enumerated and classified individually.
    """
    n = g.node_count
    counts: dict[str, float] = {}
    if n < 3 or g.edge_count == 0:
        return MotifCensus(k=3, counts=counts)

    codes = _edge_codes(g)  # sorted, because edges are sorted by (parent, child)
    mutual = _has_edges(g, g.children, g.parents, codes)
    m_cnt = np.bincount(g.parents[mutual], minlength=n).astype(np.int64)
    o_cnt = g.out_degrees.astype(np.int64) - m_cnt
    i_cnt = g.in_degrees.astype(np.int64) - m_cnt

    def pairs(x):
        return x * (x - 1) // 2

    open_counts = {
        "021D": int(pairs(o_cnt).sum()),
        "021U": int(pairs(i_cnt).sum()),
        "021C": int((o_cnt * i_cnt).sum()),
        "111U": int((m_cnt * o_cnt).sum()),
        "111D": int((m_cnt * i_cnt).sum()),
        "201": int(pairs(m_cnt).sum()),
    }

    tri = triangles(g)
    if len(tri):
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        eab = _has_edges(g, a, b, codes)
        eba = _has_edges(g, b, a, codes)
        eac = _has_edges(g, a, c, codes)
        eca = _has_edges(g, c, a, codes)
        ebc = _has_edges(g, b, c, codes)
        ecb = _has_edges(g, c, b, codes)

        def state(fwd, rev):
            # 0 = out-only, 1 = in-only, 2 = mutual, relative to the center
            return np.where(fwd & rev, 2, np.where(fwd, 0, 1)).astype(np.int64)

        open_keys = {(0, 0): "021D", (1, 1): "021U", (0, 1): "021C",
                     (0, 2): "111U", (1, 2): "111D", (2, 2): "201"}
        for s1, s2 in (
            (state(eab, eba), state(eac, eca)),  # center a
            (state(eba, eab), state(ebc, ecb)),  # center b
            (state(eca, eac), state(ecb, ebc)),  # center c
        ):
            key_lo = np.minimum(s1, s2)
            key_hi = np.maximum(s1, s2)
            for (lo, hi), name in open_keys.items():
                open_counts[name] -= int(np.count_nonzero((key_lo == lo) & (key_hi == hi)))

        masks = (
            (eab.astype(np.int64) << _BIT3[(0, 1)])
            | (eac.astype(np.int64) << _BIT3[(0, 2)])
            | (eba.astype(np.int64) << _BIT3[(1, 0)])
            | (ebc.astype(np.int64) << _BIT3[(1, 2)])
            | (eca.astype(np.int64) << _BIT3[(2, 0)])
            | (ecb.astype(np.int64) << _BIT3[(2, 1)])
        )
        uniq, cnts = np.unique(masks, return_counts=True)
        for mask, cnt in zip(uniq, cnts):
            name = TRIAD_NAME_BY_MASK[int(mask)]
            counts[name] = counts.get(name, 0) + int(cnt)

    for name, cnt in open_counts.items():
        if cnt:
            counts[name] = counts.get(name, 0) + cnt
    return MotifCensus(k=3, counts={k: float(v) for k, v in counts.items() if v})


# -- 4-node census ------------------------------------------------------------


class _BudgetExceeded(Exception):
    pass


def _esu4(
    g: EntityGraph,
    level_probs: tuple[float, float, float],
    rng: np.random.Generator | None,
    leaf_cap: int | None,
):
    """ESU over the undirected simplification; returns visited 4-node subsets.

    With ``level_probs`` below 1 this is probabilistic ESU: the ESU recursion
    tree is left untouched, but each depth-d subtree is descended into with
    probability level_probs[d], so every connected 4-subset is visited with
    probability prod(level_probs), independently.
    """
    indptr, neighbors, _, _ = g.undirected_adjacency()
    n = g.node_count
    p1, p2, p3 = level_probs
    deterministic = rng is None

    def nbrs(v: int) -> np.ndarray:
        return neighbors[indptr[v] : indptr[v + 1]]

    visited = 0
    out: list[tuple[int, int, int, int]] = []
    for v in range(n):
        nv = nbrs(v)
        ext1 = nv[nv > v]
        if ext1.size == 0:
            continue
        descend1 = None if deterministic else rng.random(ext1.size) < p1
        closed_v = set(nv.tolist())
        closed_v.add(v)
        for idx1 in range(len(ext1)):
            if descend1 is not None and not descend1[idx1]:
                continue
            w1 = int(ext1[idx1])
            rest1 = ext1[idx1 + 1 :]
            nw1 = nbrs(w1)
            fresh1 = nw1[nw1 > v]
            fresh1 = fresh1[_not_in_set(fresh1, closed_v)]
            ext2_arr = np.concatenate([rest1, fresh1])
            if ext2_arr.size == 0:
                continue
            descend2 = None if deterministic else rng.random(ext2_arr.size) < p2
            closed_w1 = closed_v | set(nw1.tolist())
            for idx2 in range(len(ext2_arr)):
                if descend2 is not None and not descend2[idx2]:
                    continue
                w2 = int(ext2_arr[idx2])
                rest2 = ext2_arr[idx2 + 1 :]
                nw2 = nbrs(w2)
                fresh2 = nw2[nw2 > v]
                fresh2 = fresh2[_not_in_set(fresh2, closed_w1)]
                ext3_arr = np.concatenate([rest2, fresh2])
                if ext3_arr.size == 0:
                    continue
                if not deterministic and p3 < 1.0:
                    ext3_arr = ext3_arr[rng.random(ext3_arr.size) < p3]
                for w3 in ext3_arr:
                    out.append((v, w1, w2, int(w3)))
                    visited += 1
                    if leaf_cap is not None and visited > leaf_cap:
                        raise _BudgetExceeded()
    return out


def _not_in_set(arr: np.ndarray, s: set) -> np.ndarray:
    return np.fromiter((int(x) not in s for x in arr), dtype=bool, count=len(arr))


def _classify_quads(g: EntityGraph, quads: list[tuple[int, int, int, int]]) -> dict[str, int]:
    if not quads:
        return {}
    codes = _edge_codes(g)
    q = np.array(quads, dtype=np.int64)
    masks = np.zeros(len(q), dtype=np.int64)
    for bit, (i, j) in enumerate(_PAIRS4):
        has = _has_edges(g, q[:, i], q[:, j], codes)
        masks |= has.astype(np.int64) << bit
    counts: dict[str, int] = {}
    uniq, cnts = np.unique(masks, return_counts=True)
    for mask, cnt in zip(uniq, cnts):
        code = four_class_code(int(mask))
        counts[code] = counts.get(code, 0) + int(cnt)
    return counts


def four_node_census(
    g: EntityGraph,
    exclude_funnel: bool = False,
    mode: str = "auto",
    budget: int = 2_000_000,
    target_samples: int = 1_000_000,
    seed: int = 0,
) -> MotifCensus:
    """Census of connected induced 4-node subgraphs.

    Exact ESU enumeration up to ``budget`` subgraphs; above that, ``auto``
    switches to probabilistic ESU calibrated (by a seeded pilot pass) so that
    about ``target_samples`` subgraphs are visited, and counts are scaled by
    the inverse sampling probability. ``exclude_funnel`` removes the
    three-parents-one-child class from the reported distribution and reports
    its share separately.
    """
    if mode not in ("auto", "exact", "sampled"):
        raise InputError(f"unknown census mode {mode!r}")
    sampled = False
    leaf_prob = 1.0
    quads: list[tuple[int, int, int, int]] | None = None

    if mode in ("auto", "exact"):
        try:
            quads = _esu4(g, (1.0, 1.0, 1.0), None, leaf_cap=budget)
        except _BudgetExceeded:
            if mode == "exact":
                raise InputError(
                    f"more than {budget} connected 4-subgraphs; rerun with mode='sampled'"
                ) from None
            quads = None

    if quads is None:
        sampled = True
        seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        # pilot passes: shrink the sampling probability until a pass fits the budget
        pilot_prob = 1e-2
        pilot_leaves = None
        for attempt in range(20):
            rng = np.random.default_rng((seed, 1, attempt))
            p = pilot_prob ** (1.0 / 3.0)
            try:
                pilot_leaves = len(_esu4(g, (p, p, p), rng, leaf_cap=max(target_samples // 4, 10_000)))
                break
            except _BudgetExceeded:
                pilot_prob /= 16.0
        if pilot_leaves is None:
            raise InputError("could not calibrate 4-node census sampling on this graph")
        est_total = max(pilot_leaves, 1) / pilot_prob
        leaf_prob = min(1.0, target_samples / est_total)
        p = leaf_prob ** (1.0 / 3.0)
        rng = np.random.default_rng((seed, 2))
        quads = _esu4(g, (p, p, p), rng, leaf_cap=None)

    raw = _classify_quads(g, quads)
    scale = 1.0 if not sampled else (1.0 / leaf_prob)
    counts = {code: cnt * scale for code, cnt in raw.items()}

    funnel_share = None
    if exclude_funnel:
        total = sum(counts.values())
        funnel = counts.pop(FUNNEL_CLASS, 0.0)
        funnel_share = (funnel / total) if total > 0 else None
    if not sampled:
        counts = {code: float(int(round(cnt))) for code, cnt in counts.items()}
    return MotifCensus(
        k=4,
        counts=counts,
        excluded_funnel_share=funnel_share,
        sampled=sampled,
        leaf_prob=leaf_prob,
    )


# -- simple cycles -------------------------------------------------------------


def count_simple_cycles(g: EntityGraph, cap: int = 1_000_000) -> CycleReport:
    """Count simple directed cycles (no repeated nodes) up to ``cap``.

    Johnson-style search restricted to nontrivial strongly connected
    components; a DAG reports zero without any search.
    """
    if cap < 1:
        raise InputError(f"cycle cap must be >= 1, got {cap}")
    labeling = strong_components(g)
    count = 0
    truncated = False

    nontrivial = np.flatnonzero(labeling.sizes >= 2)
    for comp in nontrivial:
        members = np.flatnonzero(labeling.labels == comp)
        adj = {
            int(v): [int(w) for w in g.out_children(int(v)) if labeling.labels[w] == comp]
            for v in members
        }
        components = [adj]
        while components:
            sub = components.pop()
            if len(sub) < 2:
                continue
            start = min(sub)
            found, hit_cap = _johnson_count(sub, start, cap - count)
            count += found
            if hit_cap:
                return CycleReport(cycle_count=count, truncated=True, cap=cap)
            del sub[start]
            for adj2 in _strong_subcomponents(sub):
                components.append(adj2)
    return CycleReport(cycle_count=count, truncated=truncated, cap=cap)


def _johnson_count(adj: dict[int, list[int]], start: int, remaining: int) -> tuple[int, bool]:
    """Count simple cycles through ``start`` inside one SCC (iterative Johnson)."""
    if remaining <= 0:
        return 0, True
    blocked = {start}
    blocklist: dict[int, set[int]] = {}
    stack: list[tuple[int, Iterator[int]]] = [(start, iter(adj.get(start, ())))]
    path = [start]
    closed = [False]
    count = 0
    while stack:
        node, nbrs = stack[-1]
        advanced = False
        for w in nbrs:
            if w not in adj:
                continue
            if w == start:
                count += 1
                closed[-1] = True
                if count >= remaining:
                    return count, True
            elif w not in blocked:
                blocked.add(w)
                path.append(w)
                closed.append(False)
                stack.append((w, iter(adj.get(w, ()))))
                advanced = True
                break
        if not advanced:
            stack.pop()
            v = path.pop()
            if closed.pop():
                if closed:
                    closed[-1] = True
                unblock = {v}
                while unblock:
                    u = unblock.pop()
                    if u in blocked:
                        blocked.discard(u)
                        unblock |= blocklist.pop(u, set())
            else:
                for w in adj.get(v, ()):
                    blocklist.setdefault(w, set()).add(v)
    return count, False


def _strong_subcomponents(adj: dict[int, list[int]]) -> list[dict[int, list[int]]]:
    """Tarjan SCCs of a small dict-graph; returns nontrivial components only."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = [0]
    result: list[list[int]] = []

    for root in adj:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in adj:
                    continue
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            if not advanced:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    if len(comp) >= 2:
                        result.append(comp)
    out = []
    for comp in result:
        cs = set(comp)
        out.append({v: [w for w in adj[v] if w in cs] for v in comp})
    return out


# -- shortcut edges -------------------------------------------------------------


def count_shortcut_edges(g: EntityGraph, depth: int | None = None) -> ShortcutStats:
    """Edges u->v where v is also reachable from u along a directed path of
    length >= 2 that avoids the direct edge.

    One forward probe per source node answers all of its out-edges at once:
    a breadth-first wave from u's children carries first-reacher labels, and
    a child v is a shortcut target as soon as the wave touches it from a
    label other than v (or from a node proven reachable from two different
    children). ``depth`` bounds the probe (None = exact); a bounded count is
    a lower bound, recorded in the result. Only edges whose source has
    out-degree >= 2 can qualify (an alternative path must leave u through a
    different edge), and only children with in-degree >= 2 can be targets.
    """
    if g.edge_count == 0:
        return ShortcutStats(count=0, ratio=0.0, depth_bound=depth)
    if depth is not None and depth < 2:
        raise InputError(f"shortcut probes need depth >= 2, got {depth}")
    if depth == 2:
        return _shortcuts_depth2(g)
    count = 0
    out_deg = g.out_degrees
    in_deg = g.in_degrees.tolist()
    indptr = g._out_indptr.tolist()
    child_arr = g.children.tolist()
    for u in np.flatnonzero(out_deg >= 2):
        u = int(u)
        children = child_arr[indptr[u] : indptr[u + 1]]
        targets = {c for c in children if in_deg[c] >= 2}
        if targets:
            count += _count_source_shortcuts(indptr, child_arr, u, children, targets, depth)
    return ShortcutStats(count=count, ratio=count / g.edge_count, depth_bound=depth)


def _shortcuts_depth2(g: EntityGraph) -> ShortcutStats:
    """Exact count of edges closed by a length-2 path: out(u) and in(v) meet.

    The intermediate node can never be u or v (self-loops are rejected), so
    edge (u, v) is a depth-2 shortcut iff the sorted neighbor arrays
    intersect. Vectorizable per edge, which keeps multi-million-edge graphs
    cheap regardless of hub fan-out.
    """
    count = 0
    out_ip = g._out_indptr
    in_ip = g._in_indptr
    out_children = g._out_children
    in_parents = g._in_parents
    for u, v in zip(g.parents.tolist(), g.children.tolist()):
        a = out_children[out_ip[u] : out_ip[u + 1]]
        b = in_parents[in_ip[v] : in_ip[v + 1]]
        if len(a) < 2 or len(b) < 2:
            continue  # the only out-edge is (u,v) / the only in-edge is (u,v)
        if len(a) > len(b):
            a, b = b, a
        pos = np.searchsorted(b, a)
        pos[pos == len(b)] = len(b) - 1
        if np.any(b[pos] == a):
            count += 1
    return ShortcutStats(count=count, ratio=count / g.edge_count, depth_bound=2)


def _count_source_shortcuts(
    indptr: list[int],
    child_arr: list[int],
    u: int,
    children: list[int],
    targets: set[int],
    depth: int | None,
) -> int:
    """Shortcut targets among u's children, via a labeled multi-source BFS.

    ``label[x]`` is the child whose wave reached x first. A node touched by a
    second distinct label is "mixed" (reachable from two different children)
    and is re-expanded once, so label masking inside cycles cannot hide an
    alternative path. Simple paths never revisit u, so u is excluded.
    """
    MIXED = -2
    BLOCKED = -3
    confirmed: set[int] = set()
    label: dict[int, int] = {u: BLOCKED}
    for c in children:
        label[c] = c
    frontier = list(children)
    level = 0
    while frontier and len(confirmed) < len(targets):
        level += 1
        if depth is not None and level > depth:
            break
        nxt: list[int] = []
        for x in frontier:
            lx = label[x]
            for w in child_arr[indptr[x] : indptr[x + 1]]:
                lw = label.get(w)
                if lw == BLOCKED:
                    continue
                if lw is None:
                    label[w] = lx
                    nxt.append(w)
                elif lw != MIXED and lw != lx:
                    # reachable from a second distinct child: re-expand once
                    label[w] = MIXED
                    nxt.append(w)
                if w in targets and w not in confirmed and lx != w:
                    confirmed.add(w)
        frontier = nxt
    return len(confirmed)
