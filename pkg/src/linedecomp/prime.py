"""Prime decompositions and factorization by substitution.

A tidy decomposition of a connected graph is prime when no split repeats:
distinct cuts always have distinct splits.  Primes are the atoms of a
substitution operation that splices one decomposition into another at a
cut, adding that cut's split to every spliced bag, so the spliced graph
hangs off the rest through the split alone.  Going the other way, the
maximal runs of points over which some split repeats are pairwise disjoint
and never touch; cutting them all out leaves a prime skeleton, and each
excised run with the repeating split removed from its bags is a tidy
decomposition of strictly smaller width.  Iterating through the (possibly
disconnected) remainders gives a factorization tree whose depth is bounded
by the width and whose leaves are prime.

Primality of a periodic presentation is decided the way splits are handled
everywhere else: evaluate every cut inside a window sized so that behavior
beyond it is forced, then reason about the finitely many marching families.
Deep enough, the mobile part of a family sits beyond every other index in
play, so two families drifting the same way collide somewhere if and only
if their fixed parts agree and their mobile parts differ by a uniform index
shift that the two block strides can jointly realize.  That last condition
is a divisibility check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from linedecomp.line import (
    Cut,
    CutPosition,
    Line,
    Point,
    UnsupportedScopeError,
    all_points,
    cut_after_point,
    cut_key,
    fin,
    normalize_cut,
)
from linedecomp.decomposition import (
    Bag,
    Decomposition,
    ExplicitBags,
    boundary_split,
    shift_set,
    slice_between,
    tidy,
    verify,
)
from linedecomp.splits import (
    _build_context,
    _classify_deep,
    _interior_reaches,
    empty_split_cuts,
    repeated_splits,
)
from linedecomp.wo import _raw_concat, universe_overlap, vertex_universe


# ---------------------------------------------------------------------------
# Primality


def is_prime(d: Decomposition) -> bool:
    """Tidy, connected, and no split occurs at two different cuts."""
    if not verify(d).ok:
        raise ValueError("primality is only defined for valid decompositions")
    if tidy(d) != d:
        return False
    if all(seg.is_finite for seg in d.line.segments):
        pts = all_points(d.line)
        splits = [boundary_split(d, cut_after_point(d.line, p))
                  for p in pts[:-1]]
        if any(not s for s in splits):
            return False
        return len(set(splits)) == len(splits)
    return _is_prime_periodic(d)


@dataclass(frozen=True)
class _Family:
    """One alignment class of splits marching off along an infinite reach."""

    segment: int
    direction: int  # +1 marching toward larger offsets, -1 toward smaller
    offset: int  # cut offset of the first block past the window
    period: int
    fixed: Bag
    mobile: Bag  # nonempty, all vertices indexed
    step: int  # index shift of the mobile part per block outward


def _index_bound(bags, families: Sequence[_Family]) -> int:
    out = 1
    for b in bags:
        for v in b:
            if v.is_mobile:
                out = max(out, abs(v.index))
    for f in families:
        for v in f.fixed | f.mobile:
            if v.is_mobile:
                out = max(out, abs(v.index))
    return out


def _uniform_shift(a: Bag, b: Bag) -> Optional[int]:
    """The delta with shift_set(a, delta) == b, when one exists."""
    mob_a = sorted(v for v in a if v.is_mobile)
    mob_b = sorted(v for v in b if v.is_mobile)
    if len(mob_a) != len(mob_b):
        return None
    if not mob_a:
        return 0 if a == b else None
    delta = mob_b[0].index - mob_a[0].index
    return delta if shift_set(a, delta) == b else None


def _families_collide(a: _Family, b: _Family) -> bool:
    """Do two marching families produce the same split at two deep cuts?

    Beyond the sampled blocks the mobile parts dwarf every other index, so a
    collision forces equal fixed parts and mobile parts matched by a uniform
    shift delta realized as a.step * i - b.step * j for some blocks i and j.
    When both steps drift the same way, arbitrarily deep solutions exist
    exactly when gcd(|a.step|, |b.step|) divides delta.  Opposite drifts
    escape each other, and only the sampled blocks could ever have matched.
    """
    if (a.step > 0) != (b.step > 0):
        return False
    if a.fixed != b.fixed:
        return False
    delta = _uniform_shift(a.mobile, b.mobile)
    if delta is None:
        return False
    return delta % math.gcd(abs(a.step), abs(b.step)) == 0


def _is_prime_periodic(d: Decomposition) -> bool:
    ctx = _build_context(d)
    cuts: dict[Cut, Bag] = dict(zip(ctx.window_cuts, ctx.window_splits))
    if any(not s for s in cuts.values()):
        return False  # an empty split: the graph is disconnected
    reaches = []
    if ctx.low is not None:
        reaches.append((ctx.low[0], -1, ctx.low[2]))
    if ctx.high is not None:
        reaches.append((ctx.high[0], +1, ctx.high[2]))
    for j, direction, base in _interior_reaches(ctx):
        reaches.append((j, direction, _classify_deep(d, j, direction, base)))
    families = []
    for j, direction, classes in reaches:
        t = d.templates[j]
        for cls in classes:
            if cls.kind == "constant":
                return False  # the same split at every block of the reach
            families.append(_Family(j, direction, cls.offset, t.period,
                                    cls.fixed, cls.mobile,
                                    t.stride * direction))
    # Sample enough blocks concretely that any collision involving one of
    # them lands inside the sample: past `blocks`, a family's mobile indices
    # outgrow everything a sampled split can contain.
    bound = _index_bound(cuts.values(), families)
    widest = max((abs(f.step) for f in families), default=1)
    blocks = 2 * bound + widest * (2 * bound + 2) + 2
    for f in families:
        for b in range(blocks + 1):
            c = Cut(f.segment, CutPosition.AFTER_OFFSET,
                    f.offset + f.direction * f.period * b)
            if c in cuts:
                continue  # the window already evaluated this cut
            cuts[c] = f.fixed | shift_set(f.mobile, f.step * b)
    if len(set(cuts.values())) != len(cuts):
        return False
    return not any(_families_collide(a, b)
                   for a, b in itertools.combinations(families, 2))


# ---------------------------------------------------------------------------
# Substitution


@dataclass(frozen=True)
class SubstitutionPlan:
    """A skeleton decomposition plus decompositions to splice in at some of
    its cuts.  Treat the mapping as read-only; cuts are cuts of the
    skeleton's line."""

    skeleton: Decomposition
    substituends: Mapping[Cut, Decomposition] = field(default_factory=dict)

    @property
    def is_trivial(self) -> bool:
        return not self.substituends


def _flat_bags(d: Decomposition) -> list[Bag]:
    out: list[Bag] = []
    for t in d.templates:
        out.extend(t.bags)
    return out


def _cut_index(line: Line, c: Cut) -> int:
    """Number of points weakly below an offset cut of a finite line."""
    assert c.position is CutPosition.AFTER_OFFSET
    head = sum(line.segments[j].length for j in range(c.segment))
    return head + c.offset + 1


def _point_index(line: Line, p: Point) -> int:
    head = sum(line.segments[j].length for j in range(p.segment))
    return head + p.offset


def substitute(plan: SubstitutionPlan) -> Decomposition:
    """Splice every substituend into the skeleton at its cut.

    The spliced bags all gain the split at their cut, so each substituend's
    graph meets the rest exactly in that split, made a clique.  Vertex sets
    must be pairwise disjoint.  Substitution preserves tidiness: a spliced
    bag nests in a neighbour only if its own part is empty or the skeleton
    already had nested bags.  The result lives on a single finite segment.
    """
    sk = plan.skeleton
    if any(not seg.is_finite for seg in sk.line.segments):
        raise UnsupportedScopeError(
            "substitution splices bag lists; the skeleton line must be finite")
    if not verify(sk).ok:
        raise ValueError("the skeleton does not verify")
    bags = _flat_bags(sk)
    taken: set = set().union(*bags)
    inserts: dict[int, tuple[Bag, ...]] = {}
    for cut in sorted(plan.substituends, key=lambda c: cut_key(sk.line, c)):
        sub = plan.substituends[cut]
        c = normalize_cut(sk.line, cut)
        if any(not seg.is_finite for seg in sub.line.segments):
            raise UnsupportedScopeError(
                "substitution splices bag lists; substituend lines must be finite")
        if sub.z1 or sub.z2:
            raise ValueError(
                "substituends sit between skeleton points and cannot "
                "designate limit vertices")
        if not verify(sub).ok:
            raise ValueError("a substituend does not verify")
        verts = frozenset().union(*_flat_bags(sub))
        clash = verts & taken
        if clash:
            raise ValueError(
                f"substituend vertices collide with the rest of the plan: "
                f"{sorted(clash)[:4]!r}")
        taken |= verts
        s = boundary_split(sk, c)
        inserts[_cut_index(sk.line, c)] = tuple(b | s for b in _flat_bags(sub))
    out: list[Bag] = []
    for i, b in enumerate(bags):
        out.append(b)
        out.extend(inserts.get(i + 1, ()))
    return Decomposition(Line.of(fin(len(out))), (ExplicitBags(tuple(out)),),
                         sk.z1, sk.z2)


def factor(d: Decomposition) -> SubstitutionPlan:
    """Split d into a prime skeleton and narrower substituends.

    Wherever some split repeats, the maximal run of points between its
    witness cuts is cut out whole and keyed to the skeleton cut left at the
    gap; the boundary bags stay in the skeleton, and the run's bags minus
    the repeating split become the substituend.  Distinct maximal runs
    never touch, so the gaps are distinct cuts and the excised split is
    exactly the split at the gap.  substitute inverts this bag for bag.
    """
    if any(not seg.is_finite for seg in d.line.segments):
        raise UnsupportedScopeError(
            "factorization works bag by bag; the line must be finite")
    if not verify(d).ok:
        raise ValueError("factor needs a valid decomposition")
    if tidy(d) != d:
        raise ValueError("factor needs a tidy decomposition")
    bags = _flat_bags(d)
    n = len(bags)
    pts = all_points(d.line)
    if any(not boundary_split(d, cut_after_point(d.line, p))
           for p in pts[:-1]):
        raise ValueError("factor needs a connected graph; "
                         "chop at the empty splits first")
    runs: list[tuple[int, int, Bag]] = []
    covered = [False] * n
    for r in repeated_splits(d):
        if not r.maximal:
            continue
        lo = _point_index(d.line, r.interval[0])
        hi = _point_index(d.line, r.interval[1])
        assert not any(covered[lo:hi + 1]), "maximal repeat runs overlap"
        covered[lo:hi + 1] = [True] * (hi - lo + 1)
        runs.append((lo, hi, r.split.vertices))
    keep = [i for i in range(n) if not covered[i]]
    pos = {i: q for q, i in enumerate(keep)}
    skeleton = Decomposition(Line.of(fin(len(keep))),
                             (ExplicitBags(tuple(bags[i] for i in keep)),),
                             d.z1, d.z2)
    subs: dict[Cut, Decomposition] = {}
    for lo, hi, s in sorted(runs):
        assert lo - 1 in pos and hi + 1 in pos, "a repeat run touches another"
        cut = Cut(0, CutPosition.AFTER_OFFSET, pos[lo - 1])
        subs[cut] = Decomposition(
            Line.of(fin(hi - lo + 1)),
            (ExplicitBags(tuple(b - s for b in bags[lo:hi + 1])),))
    return SubstitutionPlan(skeleton, subs)


# ---------------------------------------------------------------------------
# Components


def split_components(d: Decomposition) -> list[Decomposition]:
    """Chop the decomposition at every empty split.

    Each piece's graph is a chain of overlapping cliques, hence connected,
    and the pieces' vertex sets are pairwise disjoint.  The first and last
    piece keep the designated limit sets.  Raises when the empty splits
    cannot be listed one by one.
    """
    seams = empty_split_cuts(d)
    if not seams:
        return [d]
    bounds: list[Optional[Cut]] = [None, *seams, None]
    return [slice_between(d, a, b) for a, b in zip(bounds, bounds[1:])]


def concat_components(parts: Sequence[Decomposition]) -> Decomposition:
    """Ordered sum of decompositions of pairwise disjoint graphs.

    The seams become empty splits, the width is the largest part width, and
    split_components undoes the sum.  A designated limit set strictly inside
    the sum would no longer sit at an end of the line, so interior parts
    must not designate any.
    """
    if not parts:
        raise ValueError("nothing to concatenate")
    for i, p in enumerate(parts):
        if i > 0 and p.z1:
            raise ValueError(
                "only the first part may designate left-limit vertices")
        if i < len(parts) - 1 and p.z2:
            raise ValueError(
                "only the last part may designate right-limit vertices")
    out = parts[0]
    for p in parts[1:]:
        shared = universe_overlap(vertex_universe(out), vertex_universe(p))
        if shared is None or shared:
            raise ValueError("components must not share vertices")
        out = _raw_concat(out, p, frozenset())
    return out


# ---------------------------------------------------------------------------
# Iterated factorization


@dataclass(frozen=True)
class FactorTree:
    """A substitution plan with every substituend factored further.

    Substituends can be disconnected, so each carries one subtree per
    connected piece, in line order.  Leaves are plans without substituends,
    and every skeleton in the tree is prime.
    """

    plan: SubstitutionPlan
    children: Mapping[Cut, tuple["FactorTree", ...]]

    @property
    def depth(self) -> int:
        below = [t.depth for ts in self.children.values() for t in ts]
        return 1 + max(below, default=0)


def factor_tree(d: Decomposition) -> FactorTree:
    """Factor d and recurse through the substituends until all is prime.

    Every substituend is strictly narrower than its parent, so the depth is
    at most the width of d plus one.
    """
    plan = factor(d)
    children = {
        cut: tuple(factor_tree(p) for p in split_components(sub))
        for cut, sub in plan.substituends.items()
    }
    return FactorTree(plan, children)


def compose_tree(t: FactorTree) -> Decomposition:
    """Rebuild the decomposition a factor tree was taken from, bag for bag."""
    subs = {
        cut: concat_components([compose_tree(p) for p in pieces])
        for cut, pieces in t.children.items()
    }
    return substitute(SubstitutionPlan(t.plan.skeleton, subs))
