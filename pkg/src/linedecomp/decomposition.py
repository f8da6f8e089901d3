"""Finitely presented line-decompositions.

A decomposition assigns a finite bag of vertices to every point of a line.
Finite segments carry explicit bag lists.  Infinite segments carry periodic
templates: ``period`` residue sets, a shift ``stride`` applied once per full
period, and an optional ``constant`` set pinned into every bag unshifted.
The graph being decomposed is always the clique-completion: vertices are the
union of all bags, and each bag is a clique.

Everything here is exact.  Verification, splits, limits and tidying are
decided symbolically from the templates, never by sampling a window and
hoping.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from linedecomp.line import (
    Cut,
    CutPosition,
    Line,
    Point,
    Segment,
    SegmentKind,
    UnsupportedScopeError,
    fin,
    normalize_cut,
    point_just_above_cut,
    point_just_below_cut,
    segment_above_cut,
    segment_below_cut,
)


@functools.total_ordering
@dataclass(frozen=True)
class VertexId:
    """A graph vertex: a tag plus an optional integer index.

    Vertices with an index are mobile (they slide along periodic templates);
    vertices without one are static.
    """

    tag: str
    index: Optional[int] = None

    @property
    def is_mobile(self) -> bool:
        return self.index is not None

    @property
    def is_static(self) -> bool:
        return self.index is None

    def shift(self, d: int) -> "VertexId":
        if self.index is None or d == 0:
            return self
        return VertexId(self.tag, self.index + d)

    def __repr__(self):
        if self.index is None:
            return f"V({self.tag!r})"
        return f"V({self.tag!r},{self.index})"

    def __lt__(self, other):
        # statics sort before mobiles of the same tag
        a = (self.tag, self.index is not None, self.index or 0)
        b = (other.tag, other.index is not None, other.index or 0)
        return a < b


def V(tag: str, index: Optional[int] = None) -> VertexId:
    return VertexId(tag, index)


def shift_set(vs: Iterable[VertexId], d: int) -> frozenset[VertexId]:
    return frozenset(v.shift(d) for v in vs)


Bag = frozenset[VertexId]


def bag_of(*vs) -> Bag:
    out = []
    for v in vs:
        if isinstance(v, VertexId):
            out.append(v)
        elif isinstance(v, str):
            out.append(VertexId(v))
        else:
            tag, idx = v
            out.append(VertexId(tag, idx))
    return frozenset(out)


@dataclass(frozen=True)
class ExplicitBags:
    """Template of a finite segment: one bag per offset."""

    bags: tuple[Bag, ...]

    def bag(self, i: int) -> Bag:
        return self.bags[i]


@dataclass(frozen=True)
class PeriodicBags:
    """Template of an infinite segment.

    bag(i) = shift(residues[i mod period], stride * floor(i / period)) | constant

    Python's % and // give floor semantics for negative offsets, which is
    exactly the block arithmetic the formula needs.
    """

    period: int
    residues: tuple[Bag, ...]
    stride: int = 0
    constant: Bag = frozenset()

    def __post_init__(self):
        if self.period < 1 or len(self.residues) != self.period:
            raise ValueError("period must match the number of residue templates")

    def bag(self, i: int) -> Bag:
        b, r = divmod(i, self.period)
        return shift_set(self.residues[r], self.stride * b) | self.constant


BagTemplate = Union[ExplicitBags, PeriodicBags]


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Region(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


@dataclass(frozen=True, eq=False)
class Decomposition:
    line: Line
    templates: tuple[BagTemplate, ...]
    z1: Bag = frozenset()
    z2: Bag = frozenset()

    def __post_init__(self):
        if len(self.templates) != len(self.line.segments):
            raise ValueError("one template per segment")
        for seg, t in zip(self.line.segments, self.templates):
            if seg.kind is SegmentKind.FIN:
                if not isinstance(t, ExplicitBags) or len(t.bags) != seg.length:
                    raise ValueError("finite segments take one explicit bag per point")
                if any(not b for b in t.bags):
                    raise ValueError("bags must be nonempty")
            else:
                if not isinstance(t, PeriodicBags):
                    raise ValueError("infinite segments take periodic templates")
                if any(not (r | t.constant) for r in t.residues):
                    raise ValueError("bags must be nonempty")

    # equality is by content, so subclasses that only add invariants stay
    # interchangeable with the plain class
    def __eq__(self, other):
        if not isinstance(other, Decomposition):
            return NotImplemented
        return (self.line, self.templates, self.z1, self.z2) == (
            other.line, other.templates, other.z1, other.z2)

    def __hash__(self):
        return hash((self.line, self.templates, self.z1, self.z2))


def bag_at(d: Decomposition, t: Point) -> Bag:
    seg = d.line.segments[t.segment]
    if not seg.contains_offset(t.offset):
        raise ValueError("point out of range")
    return d.templates[t.segment].bag(t.offset)


def full_vertices(d: Decomposition, j: int) -> Bag:
    """Vertices present in every bag of segment j."""
    t = d.templates[j]
    if isinstance(t, ExplicitBags):
        out = set(t.bags[0])
        for b in t.bags[1:]:
            out &= b
        return frozenset(out)
    common = set(t.residues[0])
    for r in t.residues[1:]:
        common &= r
    keep = {v for v in common if v.is_static or t.stride == 0}
    return frozenset(keep) | t.constant


def width(d: Decomposition) -> int:
    """Max bag size minus one.  Periodic sizes are taken at generic blocks,
    where shifted residues can only meet the constant in its static part."""
    best = 0
    for t in d.templates:
        if isinstance(t, ExplicitBags):
            best = max(best, max(len(b) for b in t.bags))
        else:
            for r in t.residues:
                always = sum(1 for v in r & t.constant
                             if v.is_static or t.stride == 0)
                best = max(best, len(r) + len(t.constant) - always)
    return best - 1


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class VerificationReport:
    coverage_ok: bool
    betweenness_ok: bool
    boundary_ok: bool
    width: int
    counterexample: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.coverage_ok and self.betweenness_ok and self.boundary_ok


def _block_range(kind: SegmentKind) -> tuple[Optional[int], Optional[int]]:
    if kind is SegmentKind.OMEGA:
        return (0, None)
    if kind is SegmentKind.OMEGA_STAR:
        return (None, -1)
    return (None, None)


def occurrence_in_segment(d: Decomposition, j: int, v: VertexId):
    """Exact occurrence descriptor of a concrete vertex within one segment:
    ('none',) | ('all',) | ('offsets', sorted tuple) | ('residues', frozenset).
    """
    t = d.templates[j]
    if isinstance(t, ExplicitBags):
        offs = tuple(i for i, b in enumerate(t.bags) if v in b)
        if not offs:
            return ("none",)
        if len(offs) == len(t.bags):
            return ("all",)
        return ("offsets", offs)
    if v in t.constant:
        return ("all",)
    if v.is_static or t.stride == 0:
        rs = frozenset(r for r in range(t.period) if v in t.residues[r])
        if not rs:
            return ("none",)
        if len(rs) == t.period:
            return ("all",)
        return ("residues", rs)
    lo, hi = _block_range(d.line.segments[j].kind)
    offs = set()
    for r, res in enumerate(t.residues):
        for w in res:
            if w.is_mobile and w.tag == v.tag:
                num = v.index - w.index
                if num % t.stride == 0:
                    b = num // t.stride
                    if (lo is None or b >= lo) and (hi is None or b <= hi):
                        offs.add(b * t.period + r)
    return ("offsets", tuple(sorted(offs))) if offs else ("none",)


def _orbit_patterns(t: PeriodicBags) -> dict[tuple[str, int], list[int]]:
    """For each (tag, index class mod |stride|): the offset pattern of one
    orbit representative, unclipped.  Every vertex (tag, c + stride*k) occurs
    at pattern + k*period, so one contiguity check covers the whole orbit."""
    pats: dict[tuple[str, int], list[int]] = {}
    s = t.stride
    entries = [(w, r) for r, res in enumerate(t.residues)
               for w in res if w.is_mobile]
    classes = {(w.tag, w.index % abs(s)) for w, _ in entries}
    for tag, c in classes:
        offs = set()
        for w, r in entries:
            if w.tag == tag and (c - w.index) % s == 0:
                offs.add(((c - w.index) // s) * t.period + r)
        pats[(tag, c)] = sorted(offs)
    return pats


def _gap_counterexample(j: int, offs: list[int]) -> tuple:
    for a, b in zip(offs, offs[1:]):
        if b > a + 1:
            return (Point(j, a), Point(j, a + 1), Point(j, b))
    raise AssertionError("no gap")


def _residue_gap_example(d: Decomposition, j: int, v: VertexId, rs) -> tuple:
    """Counterexample for a vertex occupying a proper subset of residues:
    two occupied points one period apart with a missing residue in between."""
    t = d.templates[j]
    p = t.period
    base = -3 * p if d.line.segments[j].kind is SegmentKind.OMEGA_STAR else 0
    r0 = min(rs)
    missing = min(set(range(p)) - rs)
    gap = base + missing if missing > r0 else base + p + missing
    return (v, Point(j, base + r0), Point(j, gap), Point(j, base + p + r0))


def _point_where_absent(d: Decomposition, j: int, v: VertexId) -> Point:
    """Some point of segment j whose bag misses v.  Exists whenever the
    occurrence descriptor is not 'all'."""
    desc = occurrence_in_segment(d, j, v)
    seg = d.line.segments[j]
    if desc[0] == "none":
        if seg.kind is SegmentKind.FIN:
            return Point(j, 0)
        return Point(j, seg.min_offset if seg.min_offset is not None else -1)
    if desc[0] == "residues":
        missing = min(set(range(d.templates[j].period)) - desc[1])
        if seg.kind is SegmentKind.OMEGA_STAR:
            return Point(j, missing - 3 * d.templates[j].period)
        return Point(j, missing)
    offs = desc[1]
    if seg.kind is SegmentKind.FIN:
        free = [i for i in range(seg.length) if i not in set(offs)]
        return Point(j, free[0])
    if seg.kind is SegmentKind.OMEGA_STAR:
        return Point(j, min(offs) - 1)
    return Point(j, max(offs) + 1)


def _solve_shared(s1: int, m1: int, r1, s2: int, m2: int, r2, count: int = 6):
    """Common indices of the progressions {m1 + s1*b : b in r1} and
    {m2 + s2*b : b in r2}.  Ranges are (lo, hi) with None for unbounded.
    Returns ('empty',) or ('finite', [indices]) or ('infinite', [indices]);
    unbounded or oversized families are represented by `count` witnesses
    from each end, which is enough for violation detection because only
    boundary-pinned members can ever satisfy betweenness."""
    g = math.gcd(s1, s2)
    D = m2 - m1
    if D % g:
        return ("empty",)
    # one solution of s1*x - s2*y = g, scaled
    x0, y0 = _ext_gcd_pair(s1, s2)
    b1 = x0 * (D // g)
    c1, c2 = s2 // g, s1 // g  # b1 + c1*t, b2 + c2*t
    b2 = y0 * (D // g)
    t_lo, t_hi = None, None
    empty = False

    def tighten(lo, hi, base, coeff, blo, bhi):
        nonlocal empty
        if coeff == 0:
            if (blo is not None and base < blo) or (bhi is not None and base > bhi):
                empty = True
            return lo, hi
        for bound, is_lower in ((blo, True), (bhi, False)):
            if bound is None:
                continue
            if is_lower == (coeff > 0):
                val = -((-(bound - base)) // coeff)  # exact integer ceil
                lo = val if lo is None else max(lo, val)
            else:
                val = (bound - base) // coeff
                hi = val if hi is None else min(hi, val)
        return lo, hi

    t_lo, t_hi = tighten(t_lo, t_hi, b1, c1, r1[0], r1[1])
    t_lo, t_hi = tighten(t_lo, t_hi, b2, c2, r2[0], r2[1])
    if empty or (t_lo is not None and t_hi is not None and t_lo > t_hi):
        return ("empty",)
    if t_lo is None and t_hi is None:
        ts = range(0, count)
    elif t_hi is None:
        ts = range(t_lo, t_lo + count)
    elif t_lo is None:
        ts = range(t_hi, t_hi - count, -1)
    else:
        if t_hi - t_lo + 1 <= 2 * count:
            ts = range(t_lo, t_hi + 1)
        else:
            ts = list(range(t_lo, t_lo + count)) + list(range(t_hi - count + 1, t_hi + 1))
        return ("finite", sorted({m1 + s1 * (b1 + c1 * t) for t in ts}))
    return ("infinite", [m1 + s1 * (b1 + c1 * t) for t in ts])


def _ext_gcd_pair(s1: int, s2: int) -> tuple[int, int]:
    """x, y with s1*x - s2*y = gcd(s1, s2)."""
    a, b = s1, -s2
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_x, old_y = -old_x, -old_y
    return old_x, old_y


def _mobile_tag_indices(t: PeriodicBags) -> dict[str, set[int]]:
    out: dict[str, set[int]] = {}
    for res in t.residues:
        for w in res:
            if w.is_mobile:
                out.setdefault(w.tag, set()).add(w.index)
    return out


def _betweenness_counterexample(d: Decomposition) -> Optional[tuple]:
    """None when every vertex's occurrence set is an interval of the line,
    else (vertex, r, s, t) with the vertex in the bags at r and t but not s.
    """
    n = len(d.line.segments)

    # 1) within one periodic segment: statics and unshifted mobiles must fill
    #    all residues or none; shifted-orbit patterns must be contiguous
    for j, (seg, t) in enumerate(zip(d.line.segments, d.templates)):
        if not isinstance(t, PeriodicBags):
            continue
        flat = set().union(*t.residues) if t.residues else set()
        for v in sorted(flat):
            if v in t.constant:
                continue
            if v.is_static or t.stride == 0:
                desc = occurrence_in_segment(d, j, v)
                if desc[0] == "residues":
                    return _residue_gap_example(d, j, v, desc[1])
        if t.stride != 0:
            for (tag, c), pattern in _orbit_patterns(t).items():
                if len(pattern) > 1 and pattern[-1] - pattern[0] + 1 != len(pattern):
                    # slide the orbit so the full pattern is admissible and
                    # its witness avoids the finitely many constant vertices
                    shift_blocks = _expose_shift(seg.kind, t, pattern, tag, c)
                    v = VertexId(tag, c + t.stride * shift_blocks)
                    offs = [o + shift_blocks * t.period for o in pattern]
                    r_, s_, t_ = _gap_counterexample(j, offs)
                    return (v, r_, s_, t_)

    # 2) vertices shared between two shifted periodic templates.  At most one
    #    vertex per solution family can have its earlier occurrence pinned to
    #    the segment top, so a handful of consecutive witnesses is enough for
    #    the per-vertex check below to catch any violation.
    shared_candidates: set[VertexId] = set()
    periodic = [(j, t) for j, t in enumerate(d.templates)
                if isinstance(t, PeriodicBags) and t.stride != 0]
    for (j1, t1), (j2, t2) in itertools.combinations(periodic, 2):
        k1, k2 = d.line.segments[j1].kind, d.line.segments[j2].kind
        idx1, idx2 = _mobile_tag_indices(t1), _mobile_tag_indices(t2)
        for tag in set(idx1) & set(idx2):
            need = len(idx1[tag]) + len(idx2[tag]) + 2
            for m1, m2 in itertools.product(idx1[tag], idx2[tag]):
                res = _solve_shared(t1.stride, m1, _block_range(k1),
                                    t2.stride, m2, _block_range(k2), count=need)
                if res[0] != "empty":
                    shared_candidates.update(VertexId(tag, i) for i in res[1])

    # 3) concrete candidates: statics, pinned vertices, unshifted mobiles,
    #    everything in explicit bags, plus the cross-template solutions
    candidates: set[VertexId] = set(shared_candidates)
    for t in d.templates:
        if isinstance(t, ExplicitBags):
            candidates.update(*t.bags)
        else:
            candidates.update(t.constant)
            for res in t.residues:
                for v in res:
                    if v.is_static or t.stride == 0:
                        candidates.add(v)

    for v in sorted(candidates):
        bad = _check_candidate(d, v)
        if bad is not None:
            return bad
    return None


def _expose_shift(kind: SegmentKind, t: PeriodicBags, pattern, tag, c) -> int:
    """Blocks to slide an orbit pattern so every offset is admissible and the
    representative vertex is not pinned by the constant set."""
    p = t.period
    k = 0
    while True:
        offs = [o + k * p for o in pattern]
        ok = ((kind is not SegmentKind.OMEGA or offs[0] >= 0)
              and (kind is not SegmentKind.OMEGA_STAR or offs[-1] <= -1))
        v = VertexId(tag, c + t.stride * k)
        if ok and v not in t.constant:
            return k
        k = k + 1 if kind is not SegmentKind.OMEGA_STAR else k - 1


def _check_candidate(d: Decomposition, v: VertexId) -> Optional[tuple]:
    descs = [occurrence_in_segment(d, j, v) for j in range(len(d.line.segments))]
    occupied = [j for j, desc in enumerate(descs) if desc[0] != "none"]
    if not occupied:
        return None
    j_lo, j_hi = occupied[0], occupied[-1]
    for j in range(j_lo + 1, j_hi):
        if descs[j][0] != "all":
            r = _last_point_occupied(d, j_lo, descs[j_lo])
            t = _first_point_occupied(d, j_hi, descs[j_hi])
            return (v, r, _point_where_absent(d, j, v), t)
    for j, desc in zip(occupied, (descs[j] for j in occupied)):
        need_final = j < j_hi
        need_initial = j > j_lo
        bad = _segment_interval_violation(d, j, v, desc, need_final, need_initial)
        if bad is not None:
            return bad
    return None


def _last_point_occupied(d, j, desc) -> Point:
    seg = d.line.segments[j]
    if desc[0] == "offsets":
        return Point(j, desc[1][-1])
    return Point(j, seg.max_offset if seg.max_offset is not None else 0)


def _first_point_occupied(d, j, desc) -> Point:
    seg = d.line.segments[j]
    if desc[0] == "offsets":
        return Point(j, desc[1][0])
    return Point(j, seg.min_offset if seg.min_offset is not None else 0)


def _segment_interval_violation(d, j, v, desc, need_final, need_initial):
    """Check one vertex's occurrence within one segment: an interval, pinned
    to the top when the vertex continues rightward, to the bottom when it
    continues leftward."""
    seg = d.line.segments[j]
    if desc[0] == "all":
        return None
    if desc[0] == "residues":
        return _residue_gap_example(d, j, v, desc[1])
    offs = desc[1]
    if len(offs) > 1 and offs[-1] - offs[0] + 1 != len(offs):
        return (v,) + _gap_counterexample(j, list(offs))
    if need_final:
        if seg.max_offset is None or offs[-1] != seg.max_offset:
            t = _next_occurrence_point(d, j, v)
            return (v, Point(j, offs[-1]), Point(j, offs[-1] + 1), t)
    if need_initial:
        if seg.min_offset is None:
            r = _prev_occurrence_point(d, j, v)
            return (v, r, Point(j, offs[0] - 1), Point(j, offs[0]))
        if offs[0] != seg.min_offset:
            r = _prev_occurrence_point(d, j, v)
            return (v, r, Point(j, offs[0] - 1), Point(j, offs[0]))
    return None


def _next_occurrence_point(d, j, v) -> Point:
    for j2 in range(j + 1, len(d.line.segments)):
        desc = occurrence_in_segment(d, j2, v)
        if desc[0] != "none":
            return _first_point_occupied(d, j2, desc)
    raise AssertionError("caller guarantees a later occurrence")


def _prev_occurrence_point(d, j, v) -> Point:
    for j2 in range(j - 1, -1, -1):
        desc = occurrence_in_segment(d, j2, v)
        if desc[0] != "none":
            return _last_point_occupied(d, j2, desc)
    raise AssertionError("caller guarantees an earlier occurrence")


def limit_vertices(d: Decomposition, side: Side) -> Bag:
    if side is Side.LEFT:
        seg = d.line.segments[0]
        if seg.min_offset is not None:
            return bag_at(d, Point(0, seg.min_offset))
        return full_vertices(d, 0)
    j = len(d.line.segments) - 1
    seg = d.line.segments[j]
    if seg.max_offset is not None:
        return bag_at(d, Point(j, seg.max_offset))
    return full_vertices(d, j)


def verify(d: Decomposition) -> VerificationReport:
    w = width(d)
    bad = _betweenness_counterexample(d)
    if bad is not None:
        return VerificationReport(True, False, True, w, bad)
    left = limit_vertices(d, Side.LEFT)
    right = limit_vertices(d, Side.RIGHT)
    if not d.z1 <= left:
        v = min(d.z1 - left)
        return VerificationReport(True, True, False, w, (v,))
    if not d.z2 <= right:
        v = min(d.z2 - right)
        return VerificationReport(True, True, False, w, (v,))
    return VerificationReport(True, True, True, w)


# ---------------------------------------------------------------------------
# Splits at cuts (the exact boundary formula; the splits module builds on it)


def boundary_split(d: Decomposition, c: Cut) -> Bag:
    """W(I) & W(L\\I) for the initial interval named by the cut.

    With betweenness, a vertex on both sides must sit in the bag at the
    interval's greatest point when it exists, and must occur throughout the
    open end otherwise; dually above.  So the split is the intersection of
    the two boundary bags, with full_vertices standing in at open ends.
    """
    c = normalize_cut(d.line, c)
    below = point_just_below_cut(d.line, c)
    above = point_just_above_cut(d.line, c)
    down = bag_at(d, below) if below is not None else full_vertices(d, segment_below_cut(c))
    up = bag_at(d, above) if above is not None else full_vertices(d, segment_above_cut(d.line, c))
    return down & up


# ---------------------------------------------------------------------------
# Structural transforms


def reverse_decomposition(d: Decomposition) -> Decomposition:
    segs = []
    temps = []
    for seg, t in zip(reversed(d.line.segments), reversed(d.templates)):
        segs.append(seg.reversed())
        if isinstance(t, ExplicitBags):
            temps.append(ExplicitBags(tuple(reversed(t.bags))))
        else:
            p = t.period
            res = tuple(shift_set(t.residues[p - 1 - r], -t.stride) for r in range(p))
            temps.append(PeriodicBags(p, res, -t.stride, t.constant))
    return Decomposition(Line(tuple(segs)), tuple(temps), d.z2, d.z1)


def shift_decomposition(d: Decomposition, delta: int) -> Decomposition:
    def sh(t):
        if isinstance(t, ExplicitBags):
            return ExplicitBags(tuple(shift_set(b, delta) for b in t.bags))
        return PeriodicBags(t.period, tuple(shift_set(r, delta) for r in t.residues),
                            t.stride, shift_set(t.constant, delta))
    return Decomposition(d.line, tuple(sh(t) for t in d.templates),
                         shift_set(d.z1, delta), shift_set(d.z2, delta))


def add_to_bags(d: Decomposition, s: Bag) -> Decomposition:
    if not s:
        return d
    def add(t):
        if isinstance(t, ExplicitBags):
            return ExplicitBags(tuple(b | s for b in t.bags))
        return PeriodicBags(t.period, t.residues, t.stride, t.constant | s)
    return Decomposition(d.line, tuple(add(t) for t in d.templates),
                         d.z1 | s, d.z2 | s)


def remove_from_bags(d: Decomposition, s: Bag) -> Optional[Decomposition]:
    """Delete the vertices of s from every bag.  Points whose bags empty out
    are dropped from the line; returns None when nothing remains.

    On periodic segments this is only expressible when each removed vertex
    is pinned, static, or unshifted; a vertex riding a nonzero stride occurs
    at isolated offsets and its removal has no template form.
    """
    if not s:
        return d
    segs: list[Segment] = []
    temps: list[BagTemplate] = []
    for seg, t in zip(d.line.segments, d.templates):
        if isinstance(t, ExplicitBags):
            bags = [b - s for b in t.bags]
            bags = [b for b in bags if b]
            if bags:
                segs.append(fin(len(bags)))
                temps.append(ExplicitBags(tuple(bags)))
            continue
        if t.stride != 0:
            for v in s:
                if v.is_mobile and v not in t.constant:
                    hit = any(w.is_mobile and w.tag == v.tag
                              and (v.index - w.index) % t.stride == 0
                              for r in t.residues for w in r)
                    if hit:
                        raise UnsupportedScopeError(
                            "cannot remove a vertex that rides the stride")
        res = tuple(r - s for r in t.residues)
        const = t.constant - s
        keep = [r for r in range(t.period) if res[r] | const]
        if not keep:
            continue
        if len(keep) == t.period:
            segs.append(seg)
            temps.append(PeriodicBags(t.period, res, t.stride, const))
        else:
            segs.append(seg)
            temps.append(_select_residues(
                PeriodicBags(t.period, res, t.stride, const), keep, seg.kind))
    if not segs:
        return None
    z1 = d.z1 - s
    z2 = d.z2 - s
    return Decomposition(Line(tuple(segs)), tuple(temps), z1, z2)


def _select_residues(t: PeriodicBags, keep: list[int], kind: SegmentKind) -> PeriodicBags:
    """Restrict a periodic template to a sub-pattern of residues, renumbering
    offsets so the kept positions become consecutive.  The origin stays at
    block 0, so for two-sided segments the pattern lines up on both sides."""
    q = len(keep)
    res = tuple(t.residues[r] for r in keep)
    return PeriodicBags(q, res, t.stride, t.constant)


def _retemplate_from(t: PeriodicBags, kept_offsets: list[int]) -> PeriodicBags:
    """Template whose bag(i) for i = b*q + u equals t.bag(kept_offsets[u] + b*t.period),
    given one ascending period's worth of kept offsets."""
    q = len(kept_offsets)
    res = tuple(shift_set(t.residues[o % t.period], t.stride * (o // t.period))
                for o in kept_offsets)
    return PeriodicBags(q, res, t.stride, t.constant)


def _retemplate_below(t: PeriodicBags, kept_desc: list[int]) -> PeriodicBags:
    """Mirror of _retemplate_from for a downward tail: bag(-(b*q)-u) for
    u in 1..q equals t.bag(kept_desc[u-1] - b*t.period), kept_desc descending."""
    q = len(kept_desc)
    res_by_r: dict[int, Bag] = {}
    for u, o in enumerate(kept_desc, start=1):
        r = (q - u) % q
        res_by_r[r] = shift_set(t.residues[o % t.period],
                                t.stride * (o // t.period + 1))
    res = tuple(res_by_r[r] for r in range(q))
    return PeriodicBags(q, res, t.stride, t.constant)


def _rephase(t: PeriodicBags, delta: int) -> PeriodicBags:
    """Template u with u.bag(i) == t.bag(i + delta)."""
    p = t.period
    res = tuple(shift_set(t.residues[(r + delta) % p], t.stride * ((r + delta) // p))
                for r in range(p))
    return PeriodicBags(p, res, t.stride, t.constant)


def restrict(d: Decomposition, c: Cut, region: Region) -> Decomposition:
    c = normalize_cut(d.line, c)
    s = boundary_split(d, c)
    j = c.segment
    seg = d.line.segments[j]
    segs: list[Segment] = []
    temps: list[BagTemplate] = []
    if region is Region.INSIDE:
        segs.extend(d.line.segments[:j])
        temps.extend(d.templates[:j])
        if c.position is CutPosition.AFTER_SEGMENT:
            segs.append(seg)
            temps.append(d.templates[j])
        else:
            i = c.offset
            t = d.templates[j]
            if seg.kind in (SegmentKind.FIN, SegmentKind.OMEGA):
                segs.append(fin(i + 1))
                temps.append(ExplicitBags(tuple(t.bag(o) for o in range(i + 1))))
            else:
                segs.append(Segment(SegmentKind.OMEGA_STAR))
                temps.append(_rephase(t, i + 1))
        return Decomposition(Line(tuple(segs)), tuple(temps), d.z1, s)
    if c.position is CutPosition.AFTER_SEGMENT:
        pass
    else:
        i = c.offset
        t = d.templates[j]
        if seg.kind is SegmentKind.FIN:
            if i < seg.length - 1:
                segs.append(fin(seg.length - 1 - i))
                temps.append(ExplicitBags(t.bags[i + 1:]))
        elif seg.kind is SegmentKind.OMEGA_STAR:
            if i < -1:
                segs.append(fin(-1 - i))
                temps.append(ExplicitBags(tuple(t.bag(o) for o in range(i + 1, 0))))
        else:
            segs.append(Segment(SegmentKind.OMEGA))
            temps.append(_rephase(t, i + 1))
    segs.extend(d.line.segments[j + 1:])
    temps.extend(d.templates[j + 1:])
    return Decomposition(Line(tuple(segs)), tuple(temps), s, d.z2)


def translate_cut_outside(line: Line, lo: Cut, c: Cut) -> Cut:
    """Rewrite a cut of `line` in the coordinates of restrict(..., lo, OUTSIDE).
    Requires lo < c."""
    lo = normalize_cut(line, lo)
    c = normalize_cut(line, c)
    j = lo.segment
    seg = line.segments[j]
    if lo.position is CutPosition.AFTER_SEGMENT or (
            seg.max_offset is not None and lo.offset == seg.max_offset):
        drop = j + 1
        off_shift_seg = None
    else:
        drop = j
        off_shift_seg = j
    if c.segment == off_shift_seg:
        if c.position is CutPosition.AFTER_SEGMENT:
            return Cut(0, CutPosition.AFTER_SEGMENT)
        return Cut(0, CutPosition.AFTER_OFFSET, c.offset - (lo.offset + 1))
    new_seg = c.segment - drop if off_shift_seg is None else c.segment - j
    return Cut(new_seg, c.position, c.offset)


def slice_between(d: Decomposition, lo: Optional[Cut], hi: Optional[Cut]) -> Decomposition:
    """The piece strictly above `lo` and weakly below `hi` (None = line end)."""
    if lo is None and hi is None:
        return d
    if lo is None:
        return restrict(d, hi, Region.INSIDE)
    out = restrict(d, lo, Region.OUTSIDE)
    if hi is None:
        return out
    return restrict(out, translate_cut_outside(d.line, lo, hi), Region.INSIDE)


# ---------------------------------------------------------------------------
# Tidying


def _fold_zero_stride(d: Decomposition) -> tuple[Decomposition, bool]:
    changed = False
    temps = []
    for t in d.templates:
        if isinstance(t, PeriodicBags) and t.stride == 0 and t.constant:
            temps.append(PeriodicBags(t.period,
                                      tuple(r | t.constant for r in t.residues), 0))
            changed = True
        else:
            temps.append(t)
    if not changed:
        return d, False
    return replace(d, templates=tuple(temps)), True


def _is_constant_template(t: PeriodicBags) -> bool:
    if any(v.is_mobile for r in t.residues for v in r) and t.stride != 0:
        return False
    first = t.residues[0] | t.constant
    return all((r | t.constant) == first for r in t.residues)


def _collapse_constants(d: Decomposition) -> tuple[Decomposition, bool]:
    changed = False
    segs, temps = [], []
    for seg, t in zip(d.line.segments, d.templates):
        if isinstance(t, PeriodicBags) and _is_constant_template(t):
            segs.append(fin(1))
            temps.append(ExplicitBags((t.residues[0] | t.constant,)))
            changed = True
        else:
            segs.append(seg)
            temps.append(t)
    if not changed:
        return d, False
    return Decomposition(Line(tuple(segs)), tuple(temps), d.z1, d.z2), changed


@dataclass
class _Zone:
    seg_index: int
    kind: SegmentKind
    template: BagTemplate
    hull_lo: int              # first explicit offset (explicit segments: 0)
    hull_bags: list[Bag]
    tail_down: bool = False   # infinitely many bags below the hull
    tail_up: bool = False
    keep_pattern: Optional[set[int]] = None   # kept residues, tails only
    kept_hull: list[int] = field(default_factory=list)


def _zone_for_segment(d: Decomposition, j: int) -> _Zone:
    seg = d.line.segments[j]
    t = d.templates[j]
    if isinstance(t, ExplicitBags):
        return _Zone(j, seg.kind, t, 0, list(t.bags))
    p = t.period
    specials: set[int] = set()
    if t.stride != 0 and t.constant:
        cm = [(v.tag, v.index) for v in t.constant if v.is_mobile]
        for r in t.residues:
            for w in r:
                if w.is_mobile:
                    for tag, n in cm:
                        if tag == w.tag and (n - w.index) % t.stride == 0:
                            b = (n - w.index) // t.stride
                            specials.update({b - 1, b, b + 1})
    lo_b, hi_b = _block_range(seg.kind)
    if seg.kind is SegmentKind.OMEGA:
        blk_lo = 0
        blk_hi = max([1] + [b for b in specials if b >= 0]) + 1
    elif seg.kind is SegmentKind.OMEGA_STAR:
        blk_hi = -1
        blk_lo = min([-2] + [b for b in specials if b <= -1]) - 1
    else:
        blk_lo = min([-1] + list(specials)) - 1
        blk_hi = max([0] + list(specials)) + 1
    hull_lo = blk_lo * p
    hull_hi = (blk_hi + 1) * p - 1
    bags = [t.bag(i) for i in range(hull_lo, hull_hi + 1)]
    return _Zone(j, seg.kind, t, hull_lo, bags,
                 tail_down=seg.kind in (SegmentKind.OMEGA_STAR, SegmentKind.ZETA),
                 tail_up=seg.kind in (SegmentKind.OMEGA, SegmentKind.ZETA))


def _generic_keep_pattern(t: PeriodicBags, kind: SegmentKind, zone: _Zone) -> set[int]:
    p = t.period
    if kind is SegmentKind.OMEGA_STAR:
        g = zone.hull_lo // p - 3
    else:
        g = zone.hull_lo // p + len(zone.hull_bags) // p + 3
    lo = (g - 2) * p
    bags = [t.bag(i) for i in range(lo, (g + 3) * p)]
    keep: set[int] = set()
    for r in range(p):
        pos = 2 * p + r  # index of offset g*p + r within bags
        if _drops_in_window(bags, pos):
            continue
        keep.add((g * p + r) % p)
    assert keep, "a full period cannot strictly nest into itself"
    return keep


def _drops_in_window(bags: list[Bag], pos: int) -> bool:
    """Drop rule on a plain bag list: duplicate of predecessor, or strictly
    inside the nearest differing bag on either side."""
    b = bags[pos]
    if pos > 0 and bags[pos - 1] == b:
        return True
    i = pos + 1
    while i < len(bags) and bags[i] == b:
        i += 1
    if i < len(bags) and b < bags[i]:
        return True
    i = pos - 1
    while i >= 0 and bags[i] == b:
        i -= 1
    if i >= 0 and b < bags[i]:
        return True
    return False


def _tail_peek(zone: _Zone, upward: bool, count: int) -> list[Bag]:
    t = zone.template
    assert isinstance(t, PeriodicBags)
    if upward:
        start = zone.hull_lo + len(zone.hull_bags)
        return [t.bag(start + i) for i in range(count)]
    end = zone.hull_lo - 1
    return [t.bag(end - i) for i in range(count)]


def _decide_drops(d: Decomposition, zones: list[_Zone]) -> bool:
    """Fill kept_hull / keep_pattern on every zone.  Returns True if anything
    drops anywhere."""
    any_drop = False
    n = len(zones)
    full_sets = [full_vertices(d, j) for j in range(n)]

    def neighbors_above(zi: int) -> tuple[list[Bag], Optional[Bag]]:
        """Bags above zone zi's hull, in order, plus the full-set of an open
        junction if the walk ends at one.  Bounded walk: enough bags to get
        past any equality run."""
        out: list[Bag] = []
        z = zones[zi]
        if z.tail_up:
            p = z.template.period
            out.extend(_tail_peek(z, True, 3 * p + 3))
            return out, None
        k = zi + 1
        while k < n:
            nz = zones[k]
            if nz.tail_down:
                if not out:
                    return [], full_sets[nz.seg_index]
                return out, full_sets[nz.seg_index]
            out.extend(nz.hull_bags)
            if nz.tail_up:
                out.extend(_tail_peek(nz, True, 3 * nz.template.period + 3))
                return out, None
            k += 1
        return out, None

    def neighbors_below(zi: int) -> tuple[list[Bag], Optional[Bag]]:
        out: list[Bag] = []
        z = zones[zi]
        if z.tail_down:
            p = z.template.period
            out.extend(_tail_peek(z, False, 3 * p + 3))
            return out, None
        k = zi - 1
        while k >= 0:
            nz = zones[k]
            if nz.tail_up:
                return out, full_sets[nz.seg_index]
            out.extend(reversed(nz.hull_bags))
            if nz.tail_down:
                out.extend(_tail_peek(nz, False, 3 * nz.template.period + 3))
                return out, None
            k -= 1
        return out, None

    for zi, z in enumerate(zones):
        above_bags, above_full = neighbors_above(zi)
        below_bags, below_full = neighbors_below(zi)
        kept = []
        bags = z.hull_bags
        for pos, b in enumerate(bags):
            prev = bags[pos - 1] if pos > 0 else (below_bags[0] if below_bags else None)
            if prev is not None and prev == b:
                continue  # duplicate of its predecessor; the run's first survives
            seq = bags[pos + 1:] + above_bags
            nd = next((x for x in seq if x != b), None)
            if nd is not None and b < nd:
                continue
            if nd is None and above_full is not None and b <= above_full:
                # b sits inside every bag of the open segment above, and that
                # segment is not constant, so strictly inside one of them
                continue
            seq = list(reversed(bags[:pos])) + below_bags
            nd = next((x for x in seq if x != b), None)
            if nd is not None and b < nd:
                continue
            if nd is None and below_full is not None and b <= below_full:
                continue
            kept.append(pos)
        z.kept_hull = kept
        if len(kept) < len(bags):
            any_drop = True
        if z.tail_up or z.tail_down:
            z.keep_pattern = _generic_keep_pattern(z.template, z.kind, z)
            if len(z.keep_pattern) < z.template.period:
                any_drop = True
    return any_drop


def _assemble(d: Decomposition, zones: list[_Zone]) -> Decomposition:
    pieces: list[tuple] = []  # ('bags', [..]) | ('seg', Segment, template)
    for z in zones:
        kept_bags = [z.hull_bags[i] for i in z.kept_hull]
        if not (z.tail_down or z.tail_up):
            pieces.append(("bags", kept_bags))
            continue
        t = z.template
        p = t.period
        keep = z.keep_pattern
        kept_offsets = [z.hull_lo + i for i in z.kept_hull]
        if kept_offsets == [o for o in range(z.hull_lo, z.hull_lo + len(z.hull_bags))
                            if o % p in keep]:
            # the explicit window dropped nothing beyond the periodic pattern,
            # so the segment keeps its shape
            seg = d.line.segments[z.seg_index]
            if len(keep) == p:
                pieces.append(("seg", seg, t))
            else:
                pieces.append(("seg", seg, _select_residues(t, sorted(keep), seg.kind)))
            continue
        if z.tail_down:
            kept_desc = []
            o = z.hull_lo - 1
            while len(kept_desc) < len(keep):
                if o % p in keep:
                    kept_desc.append(o)
                o -= 1
            pieces.append(("seg", Segment(SegmentKind.OMEGA_STAR),
                           _retemplate_below(t, kept_desc)))
        pieces.append(("bags", kept_bags))
        if z.tail_up:
            kept_asc = []
            o = z.hull_lo + len(z.hull_bags)
            while len(kept_asc) < len(keep):
                if o % p in keep:
                    kept_asc.append(o)
                o += 1
            pieces.append(("seg", Segment(SegmentKind.OMEGA),
                           _retemplate_from(t, kept_asc)))
    segs: list[Segment] = []
    temps: list[BagTemplate] = []
    run: list[Bag] = []
    for piece in pieces:
        if piece[0] == "bags":
            run.extend(piece[1])
        else:
            if run:
                segs.append(fin(len(run)))
                temps.append(ExplicitBags(tuple(run)))
                run = []
            segs.append(piece[1])
            temps.append(piece[2])
    if run:
        segs.append(fin(len(run)))
        temps.append(ExplicitBags(tuple(run)))
    assert segs, "tidying never empties a decomposition"
    return Decomposition(Line(tuple(segs)), tuple(temps), d.z1, d.z2)


def tidy(d: Decomposition) -> Decomposition:
    """Drop every bag that duplicates or nests inside another.

    The output has pairwise distinct, non-nested bags (they are exactly the
    maximal cliques of the graph), the same clique-completion, and width at
    most the input's.  Returns the input object itself when it is already
    tidy in this structural sense.
    """
    folded, ch1 = _fold_zero_stride(d)
    collapsed, ch2 = _collapse_constants(folded)
    zones = [_zone_for_segment(collapsed, j) for j in range(len(collapsed.line.segments))]
    ch3 = _decide_drops(collapsed, zones)
    if not (ch1 or ch2 or ch3):
        return d
    return _assemble(collapsed, zones)
