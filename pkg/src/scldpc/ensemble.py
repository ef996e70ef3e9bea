"""Sampling of spatially-coupled LDPC Tanner graphs.

Two ensemble flavors are supported. In the random-regular flavor every
check node (CN) carries exactly ``d_c`` sockets and each variable node
(VN) at spatial position (SP) z connects its ``d_v`` edges to uniformly
chosen free sockets among the CNs of SPs z .. z+w-1, avoiding parallel
edges. In the Poisson flavor the CN degree is unconstrained: each VN
picks ``d_v`` distinct CNs uniformly from the same window.

Optionally the random-regular flavor can be expurgated so that no two
VNs share more than one CN, which in a bipartite graph without parallel
edges is exactly "girth at least 6".

All public identifiers are 1-based: VN ids run 1..L*M, CN ids 1..n_cn
(after removal of degree-0 CNs), SP indices 1..L for VNs and 1..L+w-1
for CNs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

FLAVOR_RANDOM_REGULAR = "random-regular"
FLAVOR_POISSON = "poisson"
EXPURGATION_NONE = "none"
EXPURGATION_GIRTH6 = "girth6"

# Rejection-sampling budgets: per-bundle redraw attempts, whole-graph
# restarts, and stub-matching rounds before a restart is triggered.
BUNDLE_ATTEMPTS = 10_000
GRAPH_RESTARTS = 100
_MATCH_ROUNDS = 2_000
_TAIL_SWITCH = 96


class SamplingBudgetError(RuntimeError):
    """Raised when the rejection-sampling budget is exhausted."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (attempts={attempts})")
        self.attempts = attempts


@dataclass(frozen=True)
class EnsembleParams:
    """Parameter tuple (d_v, d_c, w, L, M, flavor, expurgation).

    ``d_c`` is the exact CN degree for the random-regular flavor and the
    average CN degree for the Poisson flavor. ``M * d_v / d_c`` must be
    an integer (the number of CNs per spatial position).
    """

    d_v: int
    d_c: int
    w: int
    L: int
    M: int
    flavor: str = FLAVOR_RANDOM_REGULAR
    expurgation: str = EXPURGATION_NONE

    def __post_init__(self):
        for name in ("d_v", "d_c", "w", "L", "M"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.w < 2:
            raise ValueError("coupling width w must be >= 2")
        if (self.M * self.d_v) % self.d_c != 0:
            raise ValueError(
                f"M*d_v/d_c must be an integer (M={self.M}, d_v={self.d_v}, d_c={self.d_c})"
            )
        if self.flavor not in (FLAVOR_RANDOM_REGULAR, FLAVOR_POISSON):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.expurgation not in (EXPURGATION_NONE, EXPURGATION_GIRTH6):
            raise ValueError(f"unknown expurgation {self.expurgation!r}")
        if self.expurgation == EXPURGATION_GIRTH6 and self.flavor != FLAVOR_RANDOM_REGULAR:
            raise ValueError("girth6 expurgation is only defined for the random-regular flavor")
        if self.expurgation == EXPURGATION_GIRTH6:
            # Need enough CNs per window to host d_v+1 pairwise-disjoint bundles.
            if self.window_cns < self.d_v * self.d_v + self.d_v + 1:
                raise ValueError(
                    "girth6 expurgation needs w*M*d_v/d_c >= d_v^2 + d_v + 1 "
                    f"(got {self.window_cns})"
                )

    @property
    def cn_per_sp(self) -> int:
        return self.M * self.d_v // self.d_c

    @property
    def n_vn(self) -> int:
        return self.L * self.M

    @property
    def n_cn_nominal(self) -> int:
        """CN count over SPs 1..L+w-1 before degree-0 removal."""
        return (self.L + self.w - 1) * self.cn_per_sp

    @property
    def window_cns(self) -> int:
        """Number of CNs reachable from one VN: w * M * d_v / d_c."""
        return self.w * self.cn_per_sp

    @property
    def rate(self) -> float:
        return 1.0 - self.n_cn_nominal / self.n_vn


@dataclass(eq=False)
class TannerGraph:
    """A sampled bipartite graph with spatial-position bookkeeping.

    ``vn_adj`` is an (n_vn, d_v) int array whose row i holds the 1-based
    CN ids adjacent to VN i+1. CN ids refer to the compacted numbering
    left after degree-0 CNs are removed; ``nominal_of_cn`` records the
    stable re-indexing back to construction-time ids, from which the SP
    of every CN follows.
    """

    params: EnsembleParams
    vn_adj: np.ndarray
    nominal_of_cn: np.ndarray  # (n_cn,) 1-based construction-time CN ids
    _cn_adj: list | None = field(default=None, repr=False)

    @property
    def n_vn(self) -> int:
        return self.params.n_vn

    @property
    def n_cn(self) -> int:
        return len(self.nominal_of_cn)

    @property
    def sp_of_vn(self) -> np.ndarray:
        """(n_vn,) array: 1-based SP of each VN (VN id = index + 1)."""
        return np.arange(self.n_vn, dtype=np.int64) // self.params.M + 1

    @property
    def sp_of_cn(self) -> np.ndarray:
        """(n_cn,) array: 1-based SP of each compacted CN id."""
        return (self.nominal_of_cn - 1) // self.params.cn_per_sp + 1

    def sp_of_vn_id(self, vn_id: int) -> int:
        return (vn_id - 1) // self.params.M + 1

    def neighbors_of_vn(self, vn_id: int) -> np.ndarray:
        return self.vn_adj[vn_id - 1]

    @property
    def cn_adj(self) -> list:
        """Per-CN lists of adjacent VN ids (built lazily)."""
        if self._cn_adj is None:
            flat_cn = self.vn_adj.ravel()
            flat_vn = np.repeat(np.arange(1, self.n_vn + 1, dtype=np.int64), self.params.d_v)
            order = np.argsort(flat_cn, kind="stable")
            flat_cn = flat_cn[order]
            flat_vn = flat_vn[order]
            bounds = np.searchsorted(flat_cn, np.arange(1, self.n_cn + 2))
            self._cn_adj = [flat_vn[bounds[c] : bounds[c + 1]] for c in range(self.n_cn)]
        return self._cn_adj

    def cn_degrees(self) -> np.ndarray:
        return np.bincount(self.vn_adj.ravel(), minlength=self.n_cn + 1)[1:]

    def equals(self, other: "TannerGraph") -> bool:
        return (
            self.params == other.params
            and np.array_equal(self.vn_adj, other.vn_adj)
            and np.array_equal(self.nominal_of_cn, other.nominal_of_cn)
        )

    # -- plain-text serialization ------------------------------------------

    def to_text(self) -> str:
        """One header line, then one line per VN.

        CN ids in the file are the construction-time (nominal) ones so
        that degree-0 removal and SP bookkeeping survive a round trip.
        """
        buf = io.StringIO()
        p = self.params
        buf.write(f"scldpc {p.d_v} {p.d_c} {p.w} {p.L} {p.M} {p.flavor} {p.expurgation}\n")
        sp = self.sp_of_vn
        nominal = self.nominal_of_cn[self.vn_adj - 1]
        for i in range(self.n_vn):
            cns = " ".join(str(c) for c in nominal[i])
            buf.write(f"{i + 1} {sp[i]}: {cns}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "TannerGraph":
        lines = text.strip().splitlines()
        head = lines[0].split()
        if head[0] != "scldpc" or len(head) != 8:
            raise ValueError("bad graph header")
        d_v, d_c, w, L, M = (int(x) for x in head[1:6])
        params = EnsembleParams(d_v, d_c, w, L, M, flavor=head[6], expurgation=head[7])
        vn_adj = np.zeros((params.n_vn, d_v), dtype=np.int32)
        seen = np.zeros(params.n_vn, dtype=bool)
        for line in lines[1:]:
            left, right = line.split(":")
            vn_id = int(left.split()[0])
            cns = [int(x) for x in right.split()]
            if len(cns) != d_v:
                raise ValueError(f"VN {vn_id} has {len(cns)} neighbors, expected {d_v}")
            vn_adj[vn_id - 1] = cns
            seen[vn_id - 1] = True
        if not seen.all():
            raise ValueError("missing VN lines")
        return cls._from_nominal(params, vn_adj)

    @classmethod
    def _from_nominal(cls, params: EnsembleParams, vn_adj_1based: np.ndarray) -> "TannerGraph":
        """Build a graph from 1-based nominal CN ids, dropping degree-0 CNs.

        Re-indexing is stable: surviving CNs keep their relative order.
        """
        n_nom = params.n_cn_nominal
        if vn_adj_1based.min() < 1 or vn_adj_1based.max() > n_nom:
            raise ValueError("nominal CN id out of range")
        deg = np.bincount(vn_adj_1based.ravel(), minlength=n_nom + 1)[1:]
        keep = deg > 0
        remap = np.zeros(n_nom + 1, dtype=np.int32)
        remap[1:][keep] = np.arange(1, int(keep.sum()) + 1)
        return cls(
            params=params,
            vn_adj=remap[vn_adj_1based].astype(np.int32),
            nominal_of_cn=np.flatnonzero(keep).astype(np.int32) + 1,
        )


# ---------------------------------------------------------------------------
# sampling


def rng_from_seed(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by (seed, stream).

    Philox gives reproducible, platform-independent streams and cheap
    splitting: distinct (seed, stream) pairs never collide.
    """
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample(params: EnsembleParams, seed: int) -> TannerGraph:
    """Sample a Tanner graph; identical (params, seed) give identical output."""
    return sample_with_rng(params, rng_from_seed(seed))


def sample_with_rng(params: EnsembleParams, rng: np.random.Generator) -> TannerGraph:
    if params.flavor == FLAVOR_POISSON:
        vn_adj = _sample_poisson(params, rng)
    elif params.expurgation == EXPURGATION_GIRTH6:
        vn_adj = _sample_girth6(params, rng)
    else:
        vn_adj = _sample_random_regular(params, rng)
    return TannerGraph._from_nominal(params, vn_adj)


def _window_lo(params: EnsembleParams) -> np.ndarray:
    """Per-VN first socket id (0-based) of its CN window."""
    sp0 = np.arange(params.n_vn, dtype=np.int64) // params.M  # 0-based VN SP
    return sp0 * (params.cn_per_sp * params.d_c)


def _sample_random_regular(params: EnsembleParams, rng: np.random.Generator) -> np.ndarray:
    """Uniform socket matching without parallel edges.

    Edge stubs carry random priorities and propose uniformly random
    sockets inside their window; collisions are won by priority and the
    losers retry, which reproduces a sequential pass over the stubs in
    random order. The last few stubs are placed directly from the free
    lists. VNs that end up with a repeated CN get their whole bundle
    resampled (never single edges, to keep the bundle law uniform).
    """
    d_v, d_c = params.d_v, params.d_c
    n_vn = params.n_vn
    n_sock = params.n_cn_nominal * d_c
    width = params.w * params.cn_per_sp * d_c  # sockets per window, same for every VN

    stub_vn = np.repeat(np.arange(n_vn, dtype=np.int64), d_v)
    stub_lo = np.repeat(_window_lo(params), d_v)
    n_stub = n_vn * d_v

    for _ in range(GRAPH_RESTARTS):
        occupied = np.zeros(n_sock, dtype=bool)
        sock_of_stub = np.full(n_stub, -1, dtype=np.int64)
        prio = rng.permutation(n_stub)
        pending = np.arange(n_stub)

        ok = True
        for _round in range(_MATCH_ROUNDS):
            if len(pending) == 0:
                break
            if len(pending) <= _TAIL_SWITCH:
                ok = _finish_tail(
                    pending, prio, stub_lo, width, occupied, sock_of_stub, rng
                )
                pending = pending[:0]
                break
            props = stub_lo[pending] + rng.integers(0, width, size=len(pending))
            free = ~occupied[props]
            cand, cprops = pending[free], props[free]
            order = np.lexsort((prio[cand], cprops))
            cand, cprops = cand[order], cprops[order]
            first = np.ones(len(cand), dtype=bool)
            first[1:] = cprops[1:] != cprops[:-1]
            winners, wsock = cand[first], cprops[first]
            occupied[wsock] = True
            sock_of_stub[winners] = wsock
            still = np.ones(len(pending), dtype=bool)
            still[np.searchsorted(pending, winners)] = False
            pending = pending[still]
        else:
            ok = False
        if not ok or len(pending):
            continue

        cn_mat = (sock_of_stub // d_c).reshape(n_vn, d_v)
        if _repair_parallel_edges(cn_mat, sock_of_stub.reshape(n_vn, d_v), occupied,
                                  stub_lo.reshape(n_vn, d_v)[:, 0], width, d_c, rng):
            return (cn_mat + 1).astype(np.int32)
    raise SamplingBudgetError("random-regular sampling failed", GRAPH_RESTARTS)


def _finish_tail(pending, prio, stub_lo, width, occupied, sock_of_stub, rng) -> bool:
    """Place the remaining stubs one by one, in priority order."""
    for s in pending[np.argsort(prio[pending])]:
        lo = stub_lo[s]
        free = np.flatnonzero(~occupied[lo : lo + width])
        if len(free) == 0:
            return False
        pick = lo + free[rng.integers(0, len(free))]
        occupied[pick] = True
        sock_of_stub[s] = pick
    return True


def _repair_parallel_edges(cn_mat, sock_mat, occupied, vn_lo, width, d_c, rng) -> bool:
    """Resample whole bundles of VNs whose d_v edges repeat a CN."""
    srt = np.sort(cn_mat, axis=1)
    bad = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
    if len(bad) == 0:
        return True
    d_v = cn_mat.shape[1]
    for v in bad:
        occupied[sock_mat[v]] = False
    for v in bad:
        lo = vn_lo[v]
        window = occupied[lo : lo + width]
        placed = False
        for _ in range(BUNDLE_ATTEMPTS):
            free = np.flatnonzero(~window)
            if len(free) < d_v:
                return False
            picks = free[rng.choice(len(free), size=d_v, replace=False)]
            cns = (lo + picks) // d_c
            if len(set(cns.tolist())) == d_v:
                window[picks] = True
                sock_mat[v] = lo + picks
                cn_mat[v] = cns
                placed = True
                break
        if not placed:
            return False
    return True


def _sample_poisson(params: EnsembleParams, rng: np.random.Generator) -> np.ndarray:
    """Each edge picks a CN uniformly in the window; bundles with a
    repeated CN are redrawn whole, so each bundle is a uniform d_v-subset."""
    d_v = params.d_v
    n_vn = params.n_vn
    win = params.window_cns
    cn_lo = (np.arange(n_vn, dtype=np.int64) // params.M) * params.cn_per_sp

    mat = cn_lo[:, None] + rng.integers(0, win, size=(n_vn, d_v))
    for _ in range(BUNDLE_ATTEMPTS):
        srt = np.sort(mat, axis=1)
        bad = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
        if len(bad) == 0:
            return (mat + 1).astype(np.int32)
        mat[bad] = cn_lo[bad, None] + rng.integers(0, win, size=(len(bad), d_v))
    raise SamplingBudgetError("poisson sampling failed", BUNDLE_ATTEMPTS)


class _RandCursor:
    """Buffered draws from a Generator; cuts per-call overhead in the
    per-VN expurgated sampler."""

    def __init__(self, rng: np.random.Generator, block: int = 8192):
        self._rng = rng
        self._block = block
        self._buf = rng.integers(0, 1 << 62, size=block, dtype=np.int64).tolist()
        self._i = 0

    def below(self, n: int) -> int:
        # Modulo bias is ~n / 2^62, irrelevant for the tiny ranges used here.
        if self._i >= self._block:
            self._buf = self._rng.integers(0, 1 << 62, size=self._block, dtype=np.int64).tolist()
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v % n


def _sample_girth6(params: EnsembleParams, rng: np.random.Generator) -> np.ndarray:
    """Socket matching with 4-cycles forbidden.

    Processes VNs in random order; a candidate bundle is rejected when it
    repeats a CN or shares two CNs with an earlier VN (the CN-pair test),
    and the whole bundle is redrawn. Pure-Python: the expurgated flavor
    is only used at small M where this is cheap.
    """
    d_v, d_c = params.d_v, params.d_c
    cps = params.cn_per_sp
    n_vn, w = params.n_vn, params.w
    n_cn = params.n_cn_nominal
    cur = _RandCursor(rng)

    for _ in range(GRAPH_RESTARTS):
        free = [d_c] * n_cn
        sp_free = [cps * d_c] * (params.L + w - 1)
        pairs_seen: set[int] = set()
        out = np.zeros((n_vn, d_v), dtype=np.int32)
        order = rng.permutation(n_vn)
        ok = True

        for v in order:
            sp0 = v // params.M  # 0-based window start
            placed = False
            for _ in range(BUNDLE_ATTEMPTS):
                bundle = []
                for _e in range(d_v):
                    # SP by free-socket mass, then CN by rejection on its free count.
                    total = 0
                    for j in range(w):
                        total += sp_free[sp0 + j]
                    if total == 0:
                        bundle = None
                        break
                    t = cur.below(total)
                    j = 0
                    while t >= sp_free[sp0 + j]:
                        t -= sp_free[sp0 + j]
                        j += 1
                    base = (sp0 + j) * cps
                    while True:
                        c = base + cur.below(cps)
                        if cur.below(d_c) < free[c]:
                            break
                    bundle.append(c)
                if bundle is None:
                    break
                if len(set(bundle)) != d_v:
                    continue
                bundle.sort()
                keys = [
                    bundle[a] * n_cn + bundle[b]
                    for a in range(d_v - 1)
                    for b in range(a + 1, d_v)
                ]
                if any(k in pairs_seen for k in keys):
                    continue
                pairs_seen.update(keys)
                for c in bundle:
                    free[c] -= 1
                    sp_free[c // cps] -= 1
                out[v] = bundle
                placed = True
                break
            if not placed:
                ok = False
                break
        if ok:
            return out + 1
    raise SamplingBudgetError("girth6 sampling failed", GRAPH_RESTARTS * BUNDLE_ATTEMPTS)


# ---------------------------------------------------------------------------
# diagnostics


def degree_stats(graph: TannerGraph) -> dict:
    """Degree histograms and per-SP CN counts."""
    vn_deg = np.full(graph.n_vn, graph.params.d_v)
    cn_deg = graph.cn_degrees()
    vn_hist = {int(k): int(v) for k, v in zip(*np.unique(vn_deg, return_counts=True))}
    cn_hist = {int(k): int(v) for k, v in zip(*np.unique(cn_deg, return_counts=True))}
    per_sp = np.bincount(graph.sp_of_cn, minlength=graph.params.L + graph.params.w)[1:]
    return {
        "vn_degree_histogram": vn_hist,
        "cn_degree_histogram": cn_hist,
        "per_sp_cn_count": per_sp.tolist(),
    }


def validate(graph: TannerGraph) -> list[str]:
    """Check structural invariants; returns one message per violation."""
    p = graph.params
    out = []
    if graph.vn_adj.shape != (p.n_vn, p.d_v):
        out.append(f"adjacency shape {graph.vn_adj.shape} != ({p.n_vn}, {p.d_v})")
        return out
    if graph.vn_adj.min() < 1 or graph.vn_adj.max() > graph.n_cn:
        out.append("CN id out of range")
        return out

    srt = np.sort(graph.vn_adj, axis=1)
    for v in np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1)):
        out.append(f"parallel edge at VN {v + 1}")

    vn_sp = graph.sp_of_vn
    cn_sp = graph.sp_of_cn[graph.vn_adj - 1]
    bad = (cn_sp < vn_sp[:, None]) | (cn_sp > (vn_sp[:, None] + p.w - 1))
    for v in np.flatnonzero(bad.any(axis=1)):
        out.append(f"locality violation at VN {v + 1}")

    if p.flavor == FLAVOR_RANDOM_REGULAR:
        deg = graph.cn_degrees()
        for c in np.flatnonzero(deg > p.d_c):
            out.append(f"CN {c + 1} degree {deg[c]} exceeds d_c={p.d_c}")
        if (deg == 0).any():
            out.append("degree-0 CN present after compaction")

    if p.expurgation == EXPURGATION_GIRTH6:
        from .structure import has_4cycle

        if has_4cycle(graph):
            out.append("4-cycle present in girth6-expurgated graph")
    return out
