"""Independent ground truth for desk-scale instances.

Everything in this module is deliberately naive: exact dynamic programming,
exhaustive enumeration, direct truncation.  The symbolic machinery elsewhere
is validated against these brutes, never the other way round.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from linedecomp.line import Line, Point, Segment, SegmentKind, all_points, fin, zeta
from linedecomp.decomposition import (
    Bag,
    Decomposition,
    ExplicitBags,
    PeriodicBags,
    VertexId,
    bag_at,
    bag_of,
    width,
)


# ---------------------------------------------------------------------------
# Finite graphs


@dataclass(frozen=True)
class FiniteGraph:
    """A finite simple graph.  Edges are 2-element frozensets, no loops."""

    vertices: frozenset[VertexId]
    edges: frozenset[frozenset[VertexId]]

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"not an edge: {set(e)!r}")
            if not e <= self.vertices:
                raise ValueError(f"edge endpoint outside vertex set: {set(e)!r}")

    def neighbors(self, v: VertexId) -> frozenset[VertexId]:
        return frozenset(next(iter(e - {v})) for e in self.edges if v in e)

    def induced(self, vs: Iterable[VertexId]) -> "FiniteGraph":
        keep = frozenset(vs) & self.vertices
        return FiniteGraph(keep, frozenset(e for e in self.edges if e <= keep))


def graph_from_bags(bags: Iterable[Bag]) -> FiniteGraph:
    """Clique-complete every bag and take the union."""
    vs: set[VertexId] = set()
    es: set[frozenset[VertexId]] = set()
    for b in bags:
        vs |= b
        for u, w in itertools.combinations(sorted(b), 2):
            es.add(frozenset((u, w)))
    return FiniteGraph(frozenset(vs), frozenset(es))


def _vertex_text(v: VertexId) -> str:
    return v.tag if v.index is None else f"{v.tag}:{v.index}"


def _vertex_parse(s: str) -> VertexId:
    if ":" in s:
        tag, _, idx = s.rpartition(":")
        return VertexId(tag, int(idx))
    return VertexId(s)


def graph_to_edge_list(g: FiniteGraph) -> str:
    """Plain text: one edge per line, isolated vertices on their own line."""
    lines = []
    touched: set[VertexId] = set()
    for e in sorted(g.edges, key=lambda e: tuple(sorted(e))):
        u, w = sorted(e)
        touched |= {u, w}
        lines.append(f"{_vertex_text(u)} {_vertex_text(w)}")
    for v in sorted(g.vertices - touched):
        lines.append(_vertex_text(v))
    return "\n".join(lines) + ("\n" if lines else "")


def graph_from_edge_list(text: str) -> FiniteGraph:
    vs: set[VertexId] = set()
    es: set[frozenset[VertexId]] = set()
    for raw in text.splitlines():
        toks = raw.split()
        if not toks:
            continue
        if len(toks) == 1:
            vs.add(_vertex_parse(toks[0]))
        elif len(toks) == 2:
            u, w = _vertex_parse(toks[0]), _vertex_parse(toks[1])
            if u == w:
                raise ValueError(f"loop edge on {toks[0]}")
            vs |= {u, w}
            es.add(frozenset((u, w)))
        else:
            raise ValueError(f"bad edge list line: {raw!r}")
    return FiniteGraph(frozenset(vs), frozenset(es))


# ---------------------------------------------------------------------------
# Exact path-width
#
# Vertex separation equals path-width.  dp[S] is the best achievable value of
# max-over-prefixes of the boundary size, over all orderings that place the
# vertices of S first.  The boundary of S is the set of vertices in S that
# still have a neighbour outside S.


def pathwidth_exact(g: FiniteGraph, cap: int = 20) -> tuple[int, Decomposition]:
    verts = sorted(g.vertices)
    n = len(verts)
    if n == 0:
        raise ValueError("path-width of the empty graph is undefined here")
    if n > cap:
        raise ValueError(f"graph has {n} vertices, exact search capped at {cap}")
    index = {v: i for i, v in enumerate(verts)}
    adj = [0] * n
    for e in g.edges:
        u, w = tuple(e)
        adj[index[u]] |= 1 << index[w]
        adj[index[w]] |= 1 << index[u]

    full = (1 << n) - 1
    INF = n + 1
    dp = [INF] * (full + 1)
    parent = [-1] * (full + 1)
    bnd = [0] * (full + 1)
    for mask in range(1, full + 1):
        b = 0
        m = mask
        while m:
            lw = m & -m
            if adj[lw.bit_length() - 1] & ~mask & full:
                b += 1
            m ^= lw
        bnd[mask] = b

    dp[0] = 0
    for mask in range(full + 1):
        cur = dp[mask]
        if cur >= INF:
            continue
        free = full & ~mask
        while free:
            low = free & -free
            nm = mask | low
            cost = cur if cur > bnd[nm] else bnd[nm]
            if cost < dp[nm]:
                dp[nm] = cost
                parent[nm] = low.bit_length() - 1
            free ^= low

    value = dp[full]
    order_rev = []
    mask = full
    while mask:
        v = parent[mask]
        order_rev.append(v)
        mask ^= 1 << v
    order = order_rev[::-1]

    # Bag i holds v_i plus every earlier vertex with a neighbour at or past i.
    maxnbr = [-1] * n
    pos = {v: i for i, v in enumerate(order)}
    for e in g.edges:
        u, w = tuple(e)
        a, b = pos[index[u]], pos[index[w]]
        if a > b:
            a, b = b, a
        maxnbr[a] = max(maxnbr[a], b)
    bags = []
    for i in range(n):
        bag = {verts[order[i]]}
        for j in range(i):
            if maxnbr[j] >= i:
                bag.add(verts[order[j]])
        bags.append(frozenset(bag))
    d = Decomposition(Line.of(fin(n)), (ExplicitBags(tuple(bags)),),
                      frozenset(), frozenset())
    return value, d


# ---------------------------------------------------------------------------
# Brute-force splits on finite lines


def brute_splits(d: Decomposition) -> dict[int, Bag]:
    """Split of every proper initial interval, keyed by how many bags it holds."""
    if any(s.kind is not SegmentKind.FIN for s in d.line.segments):
        raise ValueError("brute_splits needs a finite line")
    bags = [bag_at(d, p) for p in all_points(d.line)]
    n = len(bags)
    out: dict[int, Bag] = {}
    below: frozenset[VertexId] = frozenset()
    above = [frozenset()] * (n + 1)
    for k in range(n - 1, -1, -1):
        above[k] = above[k + 1] | bags[k]
    for k in range(1, n):
        below = below | bags[k - 1]
        out[k] = below & above[k]
    return out


# ---------------------------------------------------------------------------
# The shifting-band family and its lower-bound certificate


def witness_family(k: int) -> Decomposition:
    """Bags {v_i, ..., v_{i+k}} along a two-way infinite line: width k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    band = bag_of(*(("v", i) for i in range(k + 1)))
    t = PeriodicBags(1, (band,), 1)
    return Decomposition(Line.of(zeta()), (t,), frozenset(), frozenset())


def _band_window_graph(k: int, lo: int, hi: int) -> FiniteGraph:
    vs = [VertexId("v", i) for i in range(lo, hi + 1)]
    es = set()
    for a in range(lo, hi + 1):
        for b in range(a + 1, min(a + k, hi) + 1):
            es.add(frozenset((VertexId("v", a), VertexId("v", b))))
    return FiniteGraph(frozenset(vs), frozenset(es))


def certificate_lowerbound(k: int, max_set_size: Optional[int] = None) -> bool:
    """Exhaustively check the finite facts that pin the well-ordered width of
    witness_family(k) above 2k - 1.

    Three consecutive blocks of the band, L = {-k-1..-1}, M = {0..k},
    R = {k+1..2k+1}, are pairwise disjoint (k+1)-cliques.  With set size
    capped at 2k (the default), (a) no allowed set contains two blocks, and
    (b) any allowed set containing L misses an edge of the k-edge matching
    between M and R, and symmetrically with R and the matching between L and
    M.  Raising the cap breaks (b) at 2k+1 and (a) at 2k+2.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    limit = 2 * k if max_set_size is None else max_set_size
    g = _band_window_graph(k, -k - 1, 2 * k + 1)
    blocks = {
        "L": frozenset(VertexId("v", i) for i in range(-k - 1, 0)),
        "M": frozenset(VertexId("v", i) for i in range(0, k + 1)),
        "R": frozenset(VertexId("v", i) for i in range(k + 1, 2 * k + 2)),
    }
    for b in blocks.values():
        for u, w in itertools.combinations(sorted(b), 2):
            if frozenset((u, w)) not in g.edges:
                return False
    for b1, b2 in itertools.combinations(blocks.values(), 2):
        if b1 & b2:
            return False
        if len(b1 | b2) <= limit:
            return False  # (a): two blocks fit in one allowed set
    matching_mr = [frozenset((VertexId("v", t), VertexId("v", t + k)))
                   for t in range(1, k + 1)]
    matching_lm = [frozenset((VertexId("v", t - k - 1), VertexId("v", t - 1)))
                   for t in range(1, k + 1)]
    for edges in (matching_mr, matching_lm):
        ends: set[VertexId] = set()
        for e in edges:
            if e not in g.edges or e & ends:
                return False
            ends |= e
    pool = sorted(g.vertices)
    for anchor, edges in (("L", matching_mr), ("R", matching_lm)):
        base = blocks[anchor]
        budget = limit - len(base)
        if budget < 0:
            continue
        others = [v for v in pool if v not in base]
        for r in range(budget + 1):
            for extra in itertools.combinations(others, r):
                w = base | frozenset(extra)
                if not any(not (e & w) for e in edges):
                    return False  # (b): this set meets every matching edge
    return True


# ---------------------------------------------------------------------------
# Materialization


def _window_offsets(seg: Segment, window: int) -> range:
    if seg.kind is SegmentKind.FIN:
        return range(seg.length)
    if seg.kind is SegmentKind.OMEGA:
        return range(0, window + 1)
    if seg.kind is SegmentKind.OMEGA_STAR:
        return range(-window - 1, 0)
    return range(-window, window + 1)


def materialize(d: Decomposition, window: int) -> tuple[Decomposition, FiniteGraph]:
    """Truncate every infinite segment to offsets within the window and
    clique-complete the result.  Finite inputs come back unchanged."""
    if window < 1:
        raise ValueError("window must be at least 1")
    if all(s.kind is SegmentKind.FIN for s in d.line.segments):
        bags = [bag_at(d, p) for p in all_points(d.line)]
        return d, graph_from_bags(bags)
    bags = []
    for j, seg in enumerate(d.line.segments):
        for i in _window_offsets(seg, window):
            bags.append(bag_at(d, Point(j, i)))
    fd = Decomposition(Line.of(fin(len(bags))), (ExplicitBags(tuple(bags)),),
                       d.z1, d.z2)
    return fd, graph_from_bags(bags)


# ---------------------------------------------------------------------------
# Compactness probe


@dataclass(frozen=True)
class ProbeReport:
    width: int
    samples: int
    max_pathwidth: int
    ok: bool


def compactness_probe(d: Decomposition, samples: int, *, window: int = 4,
                      max_vertices: int = 9, seed: int = 0) -> ProbeReport:
    """Sample finite subgraphs of a materialization and confirm each has
    path-width at most the decomposition's width."""
    k = width(d)
    fd, g = materialize(d, window)
    bags = [bag_at(fd, p) for p in all_points(fd.line)]
    rng = random.Random(seed)
    verts = sorted(g.vertices)
    worst = 0
    for s in range(samples):
        if s % 2 == 0 and bags:
            # contiguous run of bags, grown while the vertex budget lasts
            start = rng.randrange(len(bags))
            chosen: set[VertexId] = set()
            j = start
            while j < len(bags) and len(chosen | bags[j]) <= max_vertices:
                chosen |= bags[j]
                j += 1
            if not chosen:
                chosen = set(itertools.islice(sorted(bags[start]), max_vertices))
            sub = g.induced(chosen)
        else:
            size = rng.randint(1, min(max_vertices, len(verts)))
            sub = g.induced(rng.sample(verts, size))
        if not sub.vertices:
            continue
        pw, _ = pathwidth_exact(sub)
        worst = max(worst, pw)
    return ProbeReport(width=k, samples=samples, max_pathwidth=worst,
                       ok=worst <= k)


# ---------------------------------------------------------------------------
# Random valid instances
#
# A fresh-vertex chain: each bag keeps a subset of its predecessor and adds
# vertices never seen before.  Every vertex then occupies a consecutive run
# of bags, so the result is always a valid decomposition.


def random_decomposition(rng: random.Random, *, bags: int = 6, max_bag: int = 4,
                         connected: bool = True, tag: str = "v") -> Decomposition:
    if bags < 1 or max_bag < 1:
        raise ValueError("need at least one bag and a positive bag size")
    counter = itertools.count()

    def fresh(n: int) -> set[VertexId]:
        return {VertexId(tag, next(counter)) for _ in range(n)}

    cur = fresh(rng.randint(1, max_bag))
    out = [frozenset(cur)]
    for _ in range(bags - 1):
        lo = 1 if connected else 0
        keep_n = rng.randint(lo, min(len(cur), max_bag))
        kept = set(rng.sample(sorted(cur), keep_n))
        grow = rng.randint(0 if kept else 1, max_bag - len(kept))
        cur = kept | fresh(grow)
        out.append(frozenset(cur))
    return Decomposition(Line.of(fin(len(out))),
                         (ExplicitBags(tuple(out)),),
                         frozenset(), frozenset())
