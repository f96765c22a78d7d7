"""Countable closed subsets of a circular arc with exact transfinite
accumulation structure.

A set is described symbolically by a finite tree: a Leaf is an isolated
point (an exact rational turn on the unit circle) and a Cluster is a lazy
countable family of child subtrees on shrinking pairwise disjoint sub-arcs
converging to a limit angle.  Each cluster carries its exact collapse rank:
the ordinal stage at which repeated pruning of isolated points reduces the
set to the limit angle alone.  Pruning at any ordinal stage, unions over
strongly disjoint arcs, refinement to a prescribed singleton, and
materialization to concrete angles are all computed exactly on these
descriptors; no floating point is involved anywhere in this module.

The denoted point set of a tree is the set of its leaf angles; a cluster
contributes its limit angle only when flagged (which happens to every
cluster that survives at least one pruning stage, since derived sets are
closed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import count
from math import inf
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .ordinal import (
    ONE,
    ZERO,
    Ordinal,
    OrdinalLike,
    as_ordinal,
    compare,
    enumerate_below,
    format_ordinal,
    ordinal_add,
    ordinal_sub_left,
    parse_ordinal,
    predecessor,
)

__all__ = [
    "Arc",
    "Leaf",
    "Cluster",
    "Forest",
    "RankTree",
    "RankProfile",
    "build_rank_set",
    "derive",
    "derive_once",
    "union_disjoint",
    "singleton_refine",
    "materialize",
    "member",
    "cardinality",
    "rank_of",
    "rank_profile",
    "tree_to_json",
    "tree_from_json",
    "dumps_tree",
    "turn_distance",
]


def _norm_turn(t: Fraction) -> Fraction:
    return t % 1


def turn_distance(a: Fraction, b: Fraction) -> Fraction:
    """Circular distance between two angles, in turns."""
    d = abs(_norm_turn(a) - _norm_turn(b))
    return min(d, 1 - d)


@dataclass(frozen=True)
class Arc:
    """Closed arc of the unit circle: angles within half_width of center.

    All angles are exact rational turns; half_width must be positive and
    below a quarter turn so that arcs are proper.
    """

    center: Fraction
    half_width: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _norm_turn(Fraction(self.center)))
        object.__setattr__(self, "half_width", Fraction(self.half_width))
        if not 0 < self.half_width < Fraction(1, 4):
            raise ValueError("arc half_width must lie in (0, 1/4)")

    def contains(self, angle: Fraction) -> bool:
        return turn_distance(self.center, angle) <= self.half_width

    def strongly_disjoint(self, other: "Arc") -> bool:
        return turn_distance(self.center, other.center) > self.half_width + other.half_width


def _child_arc(arc: Arc, n: int) -> Arc:
    """Sub-arc hosting child n: centered half_width/2^n below the limit
    angle with half-width half_width/3^(n+2).

    The family is pairwise strongly disjoint, avoids the limit angle, and
    converges to it monotonically from below.
    """
    h = arc.half_width
    return Arc(arc.center - h / 2**n, h / 3 ** (n + 2))


# -- tree nodes ---------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    angle: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", _norm_turn(Fraction(self.angle)))


@dataclass(frozen=True)
class ConstRanks:
    value: Ordinal


@dataclass(frozen=True)
class EnumRanks:
    limit: Ordinal


RankSeq = Union[ConstRanks, EnumRanks]


@dataclass(frozen=True)
class ApexKids:
    """Child n is a fresh collapse-rank tree on the n-th sub-arc."""

    ranks: RankSeq


@dataclass(frozen=True)
class DerivedKids:
    """Children of the base pruned by beta; children of lower rank vanish."""

    base: "KidsSpec"
    beta: Ordinal


@dataclass(frozen=True)
class PickedKids:
    """Sub-selection of base children realizing collapse rank alpha."""

    base: "KidsSpec"
    alpha: Ordinal


KidsSpec = Union[ApexKids, DerivedKids, PickedKids]


@dataclass(frozen=True)
class Cluster:
    limit: Fraction
    arc: Arc
    kids: KidsSpec
    rank: Ordinal
    with_apex: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "limit", _norm_turn(Fraction(self.limit)))


@dataclass(frozen=True)
class Forest:
    """Finite union of subtrees on pairwise strongly disjoint arcs."""

    members: Tuple[Union[Leaf, Cluster], ...]


RankTree = Union[Leaf, Cluster, Forest]
Card = Union[int, float]  # float only for inf


@lru_cache(maxsize=None)
def _enum_prefix(limit: Ordinal, k: int) -> Tuple[Ordinal, ...]:
    return tuple(enumerate_below(limit, k))


def _rank_at(ranks: RankSeq, n: int) -> Ordinal:
    """Collapse rank of child n (1-based)."""
    if isinstance(ranks, ConstRanks):
        return ranks.value
    return _enum_prefix(ranks.limit, n)[n - 1]


def rank_of(tree: RankTree) -> Ordinal:
    """Collapse rank: pruning at this stage leaves exactly one point."""
    if isinstance(tree, Leaf):
        return ZERO
    if isinstance(tree, Cluster):
        return tree.rank
    raise ValueError("a forest has no single collapse rank")


def _apex_tree(rho: Ordinal, arc: Arc) -> Union[Leaf, Cluster]:
    """A set on `arc` whose pruning chain collapses to {arc.center} exactly
    at stage rho and empties at stage rho + 1."""
    if rho.is_zero:
        return Leaf(arc.center)
    p = predecessor(rho)
    if p is not None:
        kids: KidsSpec = ApexKids(ConstRanks(p))
    else:
        kids = ApexKids(EnumRanks(rho))
    return Cluster(arc.center, arc, kids, rho, False)


def _children(cluster: Cluster) -> Iterator[Tuple[int, Union[Leaf, Cluster]]]:
    """Effective children as (base sub-arc index, subtree), lazily."""
    yield from _spec_children(cluster.arc, cluster.kids)


def _spec_children(arc: Arc, spec: KidsSpec) -> Iterator[Tuple[int, Union[Leaf, Cluster]]]:
    if isinstance(spec, ApexKids):
        for n in count(1):
            yield n, _apex_tree(_rank_at(spec.ranks, n), _child_arc(arc, n))
    elif isinstance(spec, DerivedKids):
        for n, child in _spec_children(arc, spec.base):
            if compare(rank_of(child), spec.beta) >= 0:
                yield n, derive(child, spec.beta)  # type: ignore[arg-type]
    elif isinstance(spec, PickedKids):
        alpha = spec.alpha
        stream = _spec_children(arc, spec.base)
        p = predecessor(alpha)
        if p is not None:
            for n, child in stream:
                if compare(rank_of(child), p) >= 0:
                    yield n, _rank_select(child, p)
        else:
            for m in count(1):
                goal = _enum_prefix(alpha, m)[m - 1]
                for n, child in stream:
                    if compare(rank_of(child), goal) >= 0:
                        yield n, _rank_select(child, goal)
                        break
    else:  # pragma: no cover
        raise TypeError(f"unknown kids spec {spec!r}")


def _rank_select(tree: Union[Leaf, Cluster], goal: Ordinal) -> Union[Leaf, Cluster]:
    """A subtree of `tree` with collapse rank exactly `goal` (goal <= rank)."""
    if compare(goal, rank_of(tree)) == 0:
        return tree
    assert isinstance(tree, Cluster)
    for _, child in _children(tree):
        if compare(rank_of(child), goal) >= 0:
            return _rank_select(child, goal)
    raise AssertionError("unreachable: child ranks are cofinal")  # pragma: no cover


# -- hulls and normalization --------------------------------------------------


def _hull(tree: Union[Leaf, Cluster]) -> Tuple[Fraction, Fraction]:
    """(center, half_width) of an arc containing the whole subtree."""
    if isinstance(tree, Leaf):
        return tree.angle, Fraction(0)
    return tree.arc.center, tree.arc.half_width


def _hulls_disjoint(a: Tuple[Fraction, Fraction], b: Tuple[Fraction, Fraction]) -> bool:
    return turn_distance(a[0], b[0]) > a[1] + b[1]


def _sort_key(tree: Union[Leaf, Cluster]):
    c, h = _hull(tree)
    return (c, h, 0 if isinstance(tree, Leaf) else 1)


def _forest(members: Sequence[Optional[RankTree]]) -> Optional[RankTree]:
    flat: List[Union[Leaf, Cluster]] = []
    for m in members:
        if m is None:
            continue
        if isinstance(m, Forest):
            flat.extend(m.members)
        else:
            flat.append(m)
    if not flat:
        return None
    if len(flat) == 1:
        return flat[0]
    return Forest(tuple(sorted(flat, key=_sort_key)))


# -- construction -------------------------------------------------------------


def build_rank_set(alpha: OrdinalLike, nu: int, host: Arc) -> RankTree:
    """The canonical set E on `host` with prescribed pruning behavior.

    For alpha with a predecessor, pruning alpha-1 times leaves exactly nu
    points and pruning alpha times leaves nothing.  For limit alpha (nu must
    be 1) pruning at stage alpha leaves exactly one point.  In both cases
    the set is disjoint from its own accumulation points.
    """
    alpha = as_ordinal(alpha)
    if alpha.is_zero:
        raise ValueError("rank parameter must be >= 1")
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    p = predecessor(alpha)
    if p is None:
        if nu != 1:
            raise ValueError("limit rank parameters only support nu = 1")
        return _apex_tree(alpha, host)
    if nu == 1:
        return _apex_tree(p, host)
    h, c = host.half_width, host.center
    members = []
    for j in range(1, nu + 1):
        sub = Arc(c - h + (2 * j - 1) * h / nu, h / (3 * nu))
        members.append(_apex_tree(p, sub))
    result = _forest(members)
    assert result is not None
    return result


# -- derivation ---------------------------------------------------------------


def _derived_kids(kids: KidsSpec, beta: Ordinal) -> KidsSpec:
    if isinstance(kids, DerivedKids):
        return DerivedKids(kids.base, ordinal_add(kids.beta, beta))
    return DerivedKids(kids, beta)


def derive(e: Optional[RankTree], beta: OrdinalLike) -> Optional[RankTree]:
    """The set of points surviving `beta` pruning stages; None is empty.

    Successor stages remove the isolated points; a limit stage keeps the
    points surviving every earlier stage.  Both are resolved exactly from
    the collapse ranks, without expanding the lazy children.
    """
    beta = as_ordinal(beta)
    if e is None or beta.is_zero:
        return e
    if isinstance(e, Leaf):
        return None
    if isinstance(e, Forest):
        return _forest([derive(m, beta) for m in e.members])
    c = compare(beta, e.rank)
    if c > 0:
        return None
    if c == 0:
        return Leaf(e.limit)
    return Cluster(
        e.limit,
        e.arc,
        _derived_kids(e.kids, beta),
        ordinal_sub_left(beta, e.rank),
        True,
    )


def derive_once(e: Optional[RankTree]) -> Optional[RankTree]:
    """Single pruning stage: drop isolated points, keep accumulation points."""
    return derive(e, ONE)


# -- unions -------------------------------------------------------------------


def union_disjoint(sets: Sequence[Tuple[Optional[RankTree], Arc]]) -> Optional[RankTree]:
    """Union of finitely many sets on pairwise strongly disjoint host arcs.

    Pruning then commutes with the union at every stage, exactly.
    """
    arcs = [arc for _, arc in sets]
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            if not arcs[i].strongly_disjoint(arcs[j]):
                raise ValueError(
                    f"host arcs {i} and {j} overlap: closed arcs must be disjoint"
                )
    for tree, arc in sets:
        if tree is None:
            continue
        pieces = tree.members if isinstance(tree, Forest) else (tree,)
        for piece in pieces:
            hc, hh = _hull(piece)
            if turn_distance(hc, arc.center) + hh > arc.half_width:
                raise ValueError("set leaves its declared host arc")
    return _forest([tree for tree, _ in sets])


# -- membership ---------------------------------------------------------------


def member(e: Optional[RankTree], angle: Fraction) -> bool:
    """Exact membership of an angle in the denoted point set."""
    if e is None:
        return False
    angle = _norm_turn(Fraction(angle))
    if isinstance(e, Leaf):
        return e.angle == angle
    if isinstance(e, Forest):
        for m in e.members:
            hc, hh = _hull(m)
            if turn_distance(hc, angle) <= hh:
                return member(m, angle)
        return False
    if angle == e.limit:
        return e.with_apex
    h = e.arc.half_width
    delta = _norm_turn(e.limit - angle)
    if delta == 0 or delta > h:
        return False
    # children sit at offsets h/2^n below the limit; stop once they are all
    # strictly closer to the limit than the query angle
    for n in count(1):
        off = h / 2**n
        hw = h / 3 ** (n + 2)
        if off + hw < delta:
            return False
        if abs(delta - off) <= hw:
            child = _child_at(e, n)
            return child is not None and member(child, angle)
    return False  # pragma: no cover


def _child_at(cluster: Cluster, n: int) -> Optional[Union[Leaf, Cluster]]:
    """Effective child at base sub-arc index n, or None if pruned/skipped."""
    for i, child in _children(cluster):
        if i == n:
            return child
        if i > n:
            return None
    return None  # pragma: no cover


# -- refinement ---------------------------------------------------------------


def singleton_refine(e: RankTree, alpha: OrdinalLike, target: Fraction) -> RankTree:
    """A subset of e whose stage-alpha pruning is exactly {target}."""
    alpha = as_ordinal(alpha)
    target = _norm_turn(Fraction(target))
    if not member(derive(e, alpha), target):
        raise ValueError(
            f"angle {target} does not survive {format_ordinal(alpha)} pruning stages"
        )
    return _refine(e, alpha, target)


def _refine(e: RankTree, alpha: Ordinal, target: Fraction) -> RankTree:
    if isinstance(e, Leaf):
        return e
    if isinstance(e, Forest):
        for m in e.members:
            if member(derive(m, alpha), target):
                return _refine(m, alpha, target)
        raise AssertionError("unreachable: member check passed")  # pragma: no cover
    if compare(alpha, e.rank) == 0:
        return e
    if target == e.limit:
        if alpha.is_zero:
            return Leaf(e.limit)
        return Cluster(e.limit, e.arc, PickedKids(e.kids, alpha), alpha, e.with_apex)
    h = e.arc.half_width
    delta = _norm_turn(e.limit - target)
    for n in count(1):
        off = h / 2**n
        hw = h / 3 ** (n + 2)
        if off + hw < delta:
            break
        if abs(delta - off) <= hw:
            child = _child_at(e, n)
            if child is not None and member(derive(child, alpha), target):
                return _refine(child, alpha, target)
            break
    raise AssertionError("unreachable: member check passed")  # pragma: no cover


# -- materialization ----------------------------------------------------------


def materialize(e: Optional[RankTree], depth: int, per_level: int) -> List[Fraction]:
    """Deterministic finite prefix of the denoted set, as sorted angles.

    Every cluster is expanded to its first per_level children, down to
    `depth` nested cluster expansions; clusters still unexpanded at the
    frontier contribute nothing (except a flagged limit angle).  The result
    grows monotonically under inclusion in both parameters.
    """
    if depth < 1 or per_level < 1:
        raise ValueError("depth and per_level must be >= 1")
    out: set = set()
    _gather(e, depth, per_level, out)
    return sorted(out)


def _gather(e: Optional[RankTree], depth: int, per_level: int, out: set) -> None:
    if e is None:
        return
    if isinstance(e, Leaf):
        out.add(e.angle)
        return
    if isinstance(e, Forest):
        for m in e.members:
            _gather(m, depth, per_level, out)
        return
    if e.with_apex:
        out.add(e.limit)
    if depth == 0:
        return
    taken = 0
    for _, child in _children(e):
        _gather(child, depth - 1, per_level, out)
        taken += 1
        if taken >= per_level:
            break


# -- cardinality and rank profiles --------------------------------------------


def cardinality(e: Optional[RankTree]) -> Card:
    """Exact number of points; math.inf for countably infinite sets."""
    if e is None:
        return 0
    if isinstance(e, Leaf):
        return 1
    if isinstance(e, Forest):
        total: Card = 0
        for m in e.members:
            c = cardinality(m)
            if c == inf:
                return inf
            total += c
        return total
    # every cluster has infinitely many nonempty children by construction
    return inf


@dataclass(frozen=True)
class RankProfile:
    """Cardinalities of the pruning chain at selected ordinal stages."""

    entries: Tuple[Tuple[Ordinal, Card], ...]

    def __post_init__(self) -> None:
        prev: Optional[Card] = None
        for _, card in self.entries:
            if prev is not None and card > prev:
                raise ValueError("cardinalities must be non-increasing along the chain")
            prev = card

    def as_dict(self) -> dict:
        return {
            format_ordinal(beta): ("infinite" if card == inf else card)
            for beta, card in self.entries
        }


def rank_profile(e: Optional[RankTree], betas: Sequence[OrdinalLike],
                 extra_isolated: int = 0) -> RankProfile:
    """Profile of e at the given stages; extra_isolated adds that many
    isolated points at stage 0 only (used for an adjoined origin)."""
    entries = []
    for b in sorted({as_ordinal(b) for b in betas}):
        card = cardinality(derive(e, b))
        if b.is_zero and card != inf:
            card += extra_isolated
        entries.append((b, card))
    return RankProfile(tuple(entries))


# -- JSON ---------------------------------------------------------------------


def _frac_str(f: Fraction) -> str:
    return str(Fraction(f))


def _frac(s: str) -> Fraction:
    return Fraction(s)


def _arc_to_json(arc: Arc) -> dict:
    return {"center": _frac_str(arc.center), "half_width": _frac_str(arc.half_width)}


def _arc_from_json(obj: dict) -> Arc:
    return Arc(_frac(obj["center"]), _frac(obj["half_width"]))


def _kids_to_json(kids: KidsSpec) -> dict:
    if isinstance(kids, ApexKids):
        if isinstance(kids.ranks, ConstRanks):
            ranks = {"kind": "const", "value": format_ordinal(kids.ranks.value)}
        else:
            ranks = {"kind": "enum", "limit": format_ordinal(kids.ranks.limit)}
        return {"kind": "apex", "ranks": ranks}
    if isinstance(kids, DerivedKids):
        return {"kind": "derived", "base": _kids_to_json(kids.base),
                "beta": format_ordinal(kids.beta)}
    return {"kind": "picked", "base": _kids_to_json(kids.base),
            "alpha": format_ordinal(kids.alpha)}


def _kids_from_json(obj: dict) -> KidsSpec:
    kind = obj["kind"]
    if kind == "apex":
        r = obj["ranks"]
        if r["kind"] == "const":
            return ApexKids(ConstRanks(parse_ordinal(r["value"])))
        return ApexKids(EnumRanks(parse_ordinal(r["limit"])))
    if kind == "derived":
        return DerivedKids(_kids_from_json(obj["base"]), parse_ordinal(obj["beta"]))
    if kind == "picked":
        return PickedKids(_kids_from_json(obj["base"]), parse_ordinal(obj["alpha"]))
    raise ValueError(f"unknown kids kind {kind!r}")


def tree_to_json(e: Optional[RankTree]) -> dict:
    """Descriptor serialization; the loader replays it exactly."""
    if e is None:
        return {"kind": "empty"}
    if isinstance(e, Leaf):
        return {"kind": "leaf", "angle": _frac_str(e.angle)}
    if isinstance(e, Forest):
        return {"kind": "forest", "members": [tree_to_json(m) for m in e.members]}
    obj = {
        "kind": "cluster",
        "limit": _frac_str(e.limit),
        "ordinal": format_ordinal(e.rank),
        "nu": 1,
        "arc": _arc_to_json(e.arc),
    }
    pristine = _apex_tree(e.rank, e.arc)
    if not (isinstance(pristine, Cluster) and pristine.kids == e.kids
            and not e.with_apex and pristine.limit == e.limit):
        obj["kids"] = _kids_to_json(e.kids)
        obj["with_apex"] = e.with_apex
    return obj


def tree_from_json(obj: dict) -> Optional[RankTree]:
    kind = obj["kind"]
    if kind == "empty":
        return None
    if kind == "leaf":
        return Leaf(_frac(obj["angle"]))
    if kind == "forest":
        members = [tree_from_json(m) for m in obj["members"]]
        return _forest(members)
    if kind == "cluster":
        arc = _arc_from_json(obj["arc"])
        rank = parse_ordinal(obj["ordinal"])
        if "kids" not in obj:
            tree = _apex_tree(rank, arc)
            if isinstance(tree, Cluster) and tree.limit != _frac(obj["limit"]):
                raise ValueError("cluster limit does not match its arc center")
            return tree
        return Cluster(
            _frac(obj["limit"]),
            arc,
            _kids_from_json(obj["kids"]),
            rank,
            bool(obj.get("with_apex", False)),
        )
    raise ValueError(f"unknown tree kind {kind!r}")


def dumps_tree(e: Optional[RankTree]) -> str:
    return json.dumps(tree_to_json(e), sort_keys=True, separators=(",", ":"))
