"""Stopping-set structure: membership tests, size-2 census, girth, and
exhaustive small-instance search.

A VN subset A is a stopping set when every CN adjacent to A has at least
two neighbors inside A. Without parallel edges, two VNs form a size-2
stopping set exactly when their CN neighborhoods coincide, so the size-2
census reduces to grouping identical (sorted) adjacency rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .ensemble import TannerGraph

BRUTE_FORCE_BUDGET = 5_000_000


@dataclass
class StoppingSetCensus:
    """Counts of size-2 stopping sets, bucketed by SP offset.

    ``within_sp[z-1]`` counts pairs whose two VNs both sit at SP z;
    ``cross[k]`` counts pairs at SPs (z, z+k), summed over z, for
    k = 1 .. w-1. Offsets >= w cannot occur (disjoint windows).
    """

    within_sp: list[int]
    cross: dict[int, int]
    min_ss_list: list[tuple[int, int]] = field(default_factory=list)

    @property
    def total_within(self) -> int:
        return sum(self.within_sp)

    def to_row(self, sample_seed=None) -> dict:
        return {
            "sample_seed": sample_seed,
            "within": list(self.within_sp),
            "cross": {str(k): v for k, v in self.cross.items()},
        }


def is_stopping_set(graph: TannerGraph, vns) -> bool:
    """True when every CN adjacent to ``vns`` touches it at least twice.

    The empty set is vacuously a stopping set; callers that care must
    test emptiness themselves.
    """
    idx = np.asarray(sorted(vns), dtype=np.int64)
    if len(idx) == 0:
        return True
    cns = graph.vn_adj[idx - 1].ravel()
    _, counts = np.unique(cns, return_counts=True)
    return bool((counts >= 2).all())


def census_size2(graph: TannerGraph, record_pairs: bool = False) -> StoppingSetCensus:
    """Exact size-2 stopping-set counts via sorted-adjacency grouping."""
    p = graph.params
    rows = np.sort(graph.vn_adj, axis=1)
    order = np.lexsort(rows.T[::-1])
    srows = rows[order]
    same = (srows[1:] == srows[:-1]).all(axis=1)
    within = [0] * p.L
    cross = {k: 0 for k in range(1, p.w)}
    pairs: list[tuple[int, int]] = []

    # Walk runs of identical rows; runs are tiny so the loop is cheap.
    breaks = np.flatnonzero(~same)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [len(srows)]))
    sp = graph.sp_of_vn
    for s, e in zip(starts, ends):
        if e - s < 2:
            continue
        members = order[s:e]
        for a, b in combinations(sorted(members.tolist()), 2):
            k = int(sp[b] - sp[a])
            if k == 0:
                within[int(sp[a]) - 1] += 1
            else:
                cross[k] += 1
            if record_pairs:
                pairs.append((a + 1, b + 1))
    return StoppingSetCensus(within_sp=within, cross=cross, min_ss_list=pairs)


def has_4cycle(graph: TannerGraph) -> bool:
    """True when some pair of VNs shares two CNs (a 4-cycle)."""
    d_v = graph.params.d_v
    rows = np.sort(graph.vn_adj, axis=1).astype(np.int64)
    n = graph.n_cn + 1
    keys = []
    for a in range(d_v - 1):
        for b in range(a + 1, d_v):
            keys.append(rows[:, a] * n + rows[:, b])
    keys = np.concatenate(keys)
    return len(np.unique(keys)) != len(keys)


def girth(graph: TannerGraph):
    """Length of the shortest cycle; ``math.inf`` for forests.

    Parallel edges are reported as girth 2. Otherwise the 4-cycle test
    is done by CN-pair hashing and longer girths by BFS from every VN
    with early exit at the best length found so far.
    """
    srt = np.sort(graph.vn_adj, axis=1)
    if (srt[:, 1:] == srt[:, :-1]).any():
        return 2
    if has_4cycle(graph):
        return 4

    # BFS on the bipartite graph; vertices 0..n_vn-1 are VNs, then CNs.
    n_vn, n_cn = graph.n_vn, graph.n_cn
    adj_vn = [graph.vn_adj[i] + n_vn - 1 for i in range(n_vn)]
    adj_cn = [np.asarray(a) - 1 for a in graph.cn_adj]
    best = math.inf

    for root in range(n_vn):
        dist = {root: 0}
        parent = {root: -1}
        frontier = [root]
        depth = 0
        while frontier and 2 * depth + 2 < best:
            nxt = []
            for u in frontier:
                nbrs = adj_vn[u] if u < n_vn else adj_cn[u - n_vn]
                for v in nbrs:
                    v = int(v)
                    if v not in dist:
                        dist[v] = depth + 1
                        parent[v] = u
                        nxt.append(v)
                    elif parent[u] != v:
                        cyc = dist[u] + dist[v] + 1
                        if cyc % 2 == 1:
                            # Bipartite: odd sums arise from same-level
                            # cross edges, real cycle is one shorter.
                            cyc -= 1
                        best = min(best, cyc)
            frontier = nxt
            depth += 1
        if best == 6:
            break
    return best


def brute_force_min_ss(graph: TannerGraph, restrict=None, max_size: int = 5):
    """Smallest nonempty stopping set inside ``restrict``, exhaustively.

    Enumerates subsets in increasing cardinality and returns
    ``(size, witnesses)`` with every witness of the minimal size, or
    ``(None, [])`` when no stopping set of size <= max_size exists.
    """
    if restrict is None:
        cand = list(range(1, graph.n_vn + 1))
    else:
        cand = sorted(int(v) for v in restrict)
    n = len(cand)
    total = sum(math.comb(n, s) for s in range(1, max_size + 1))
    if total > BRUTE_FORCE_BUDGET:
        raise ValueError(
            f"search space {total} exceeds budget {BRUTE_FORCE_BUDGET}; "
            "shrink restrict or max_size"
        )
    rows = {v: graph.vn_adj[v - 1] for v in cand}
    for size in range(1, max_size + 1):
        witnesses = []
        for combo in combinations(cand, size):
            cns = np.concatenate([rows[v] for v in combo])
            _, counts = np.unique(cns, return_counts=True)
            if (counts >= 2).all():
                witnesses.append(set(combo))
        if witnesses:
            return size, witnesses
    return None, []


def verify_min_ss_pattern(graph: TannerGraph, vns) -> bool:
    """Check the canonical minimal stopping-set shape for |S| = d_v + 1.

    The bi-adjacency of S against its neighborhood must consist of all
    weight-2 rows: every neighboring CN touches exactly two VNs of S and
    every VN pair shares exactly one CN.
    """
    d_v = graph.params.d_v
    members = sorted(int(v) for v in vns)
    if len(members) != d_v + 1:
        return False
    rows = [set(graph.vn_adj[v - 1].tolist()) for v in members]
    if any(len(r) != d_v for r in rows):
        return False
    all_cns = set().union(*rows)
    if len(all_cns) != d_v * (d_v + 1) // 2:
        return False
    for c in all_cns:
        if sum(1 for r in rows if c in r) != 2:
            return False
    for a, b in combinations(range(d_v + 1), 2):
        if len(rows[a] & rows[b]) != 1:
            return False
    return True
