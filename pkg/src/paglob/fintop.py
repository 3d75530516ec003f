"""Finite topological spaces and the final topology on a finite-monoid
globalization.

Open sets are bitmasks over point indices.  A finite topology is fixed by
the minimal open neighbourhood of each point, and the final topology on Y
is the Alexandrov topology of the preorder generated by
``class(u, x) <= class(u, x')`` for ``x'`` in the neighbourhood of ``x``.
For small Y the open family is also computed by filtering every subset,
and the two routes must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

from .common import PreconditionError, ValidationReport, bits, to_mask
from .glob import QuotientGlobalization
from .paction import MonoidPartialAction, PartialAction

FILTER_LIMIT = 20
OPEN_LIMIT = 1 << 20


@dataclass(frozen=True)
class FiniteTopology:
    """``opens`` is the family of open sets as bitmasks (any order)."""

    size: int
    opens: frozenset[int]

    @classmethod
    def from_opens(cls, size: int, opens: Iterable[Iterable[int]]) -> "FiniteTopology":
        return cls(size, frozenset(to_mask(s) for s in opens))

    @classmethod
    def discrete(cls, size: int) -> "FiniteTopology":
        return cls.from_neighborhoods([1 << x for x in range(size)])

    @classmethod
    def indiscrete(cls, size: int) -> "FiniteTopology":
        return cls(size, frozenset({0, (1 << size) - 1}))

    @classmethod
    def from_neighborhoods(cls, nbhds: Sequence[int]) -> "FiniteTopology":
        """Topology whose opens are all unions of the given sets.

        Valid only if ``x in nbhds[x]`` and ``nbhds`` is transitive
        (``y in nbhds[x]`` implies ``nbhds[y] ⊂ nbhds[x]``).
        """
        opens = {0}
        frontier = [0]
        while frontier:
            new = []
            for u in frontier:
                for m in nbhds:
                    v = u | m
                    if v not in opens:
                        opens.add(v)
                        new.append(v)
                        if len(opens) > OPEN_LIMIT:
                            raise ValueError("too many open sets to materialize")
            frontier = new
        return cls(len(nbhds), frozenset(opens))

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def is_open(self, s) -> bool:
        return (s if isinstance(s, int) else to_mask(s)) in self.opens

    def is_closed(self, s) -> bool:
        m = s if isinstance(s, int) else to_mask(s)
        return (self.full & ~m) in self.opens

    @cached_property
    def neighborhoods(self) -> tuple[int, ...]:
        """Smallest open set containing each point."""
        out = []
        for x in range(self.size):
            m = self.full
            for u in self.opens:
                if u >> x & 1:
                    m &= u
            out.append(m)
        return tuple(out)

    def nbhd(self, x: int) -> int:
        return self.neighborhoods[x]

    def closure(self, s: int) -> int:
        return to_mask(x for x in range(self.size) if self.neighborhoods[x] & s)

    @property
    def is_T1(self) -> bool:
        return all(self.neighborhoods[x] == 1 << x for x in range(self.size))

    def subspace_opens(self, sub: int) -> frozenset[int]:
        return frozenset(u & sub for u in self.opens)


def validate_topology(t: FiniteTopology) -> ValidationReport:
    bad = []
    if any(u & ~t.full for u in t.opens):
        bad.append("an open set mentions a point out of range")
    if 0 not in t.opens:
        bad.append("empty set is not open")
    if t.full not in t.opens:
        bad.append("whole space is not open")
    ops = sorted(t.opens)
    for i, u in enumerate(ops):
        for v in ops[i + 1 :]:
            if u | v not in t.opens:
                bad.append(f"union of {bits(u)} and {bits(v)} is not open")
            if u & v not in t.opens:
                bad.append(f"intersection of {bits(u)} and {bits(v)} is not open")
            if len(bad) > 20:
                break
    return ValidationReport(not bad, bad, {"T1": (not bad) and t.is_T1})


def _topology(a) -> FiniteTopology:
    t = a.space.topology
    if t is None:
        raise PreconditionError("the space carries no topology")
    return t


def _continuous_on_domain(t: FiniteTopology, f) -> bool:
    dom = to_mask(x for x, y in enumerate(f) if y is not None)
    relative = t.subspace_opens(dom)
    for u in t.opens:
        pre = to_mask(x for x, y in enumerate(f) if y is not None and u >> y & 1)
        if pre not in relative:
            return False
    return True


def is_continuous_action(a) -> bool:
    """Every generator (or monoid element) map is continuous on its domain."""
    t = _topology(a)
    return all(_continuous_on_domain(t, f) for f in a.maps)


def _image_map_ok(t: FiniteTopology, f, which: str) -> bool:
    dom = to_mask(x for x, y in enumerate(f) if y is not None)
    if which == "closed":
        rel = frozenset((t.full & ~u) & dom for u in t.opens)
        good = t.is_closed
    else:
        rel = t.subspace_opens(dom)
        good = t.is_open
    return all(good(to_mask(f[x] for x in bits(s))) for s in rel)


def _strongly(ma: MonoidPartialAction, which: str) -> bool:
    t = _topology(ma)
    test = t.is_closed if which == "closed" else t.is_open
    for f in ma.maps:
        if not test(to_mask(x for x, y in enumerate(f) if y is not None)):
            return False
        if not _image_map_ok(t, f, which):
            return False
    return True


def is_strongly_closed(ma) -> bool:
    """dom(u) closed and u closed on dom(u), for every listed map."""
    return _strongly(ma, "closed")


def is_strongly_open(ma) -> bool:
    return _strongly(ma, "open")


# -- final topology on Y ---------------------------------------------------------


def _preimage(q: QuotientGlobalization, u: int, v: int) -> int:
    """{x : class(u, x) in V} for a class bitmask V."""
    return to_mask(x for x in range(q.n_points) if v >> q.class_of(u, x) & 1)


def globalization_topology(
    q: QuotientGlobalization, t: FiniteTopology, mode: str = "auto"
) -> FiniteTopology:
    """Final topology on the classes: V open iff every u^-1[V] is open in X.

    ``mode`` is "filter" (test all 2^|Y| subsets), "preorder" (generate from
    minimal neighbourhoods), or "auto" (filter when |Y| <= 20).
    """
    if t.size != q.n_points:
        raise ValueError("topology and action disagree on the number of points")
    k = q.size
    if mode == "auto":
        mode = "filter" if k <= FILTER_LIMIT else "preorder"
    if mode == "filter":
        if k > FILTER_LIMIT:
            raise ValueError(f"|Y| = {k} exceeds the subset-filter limit {FILTER_LIMIT}")
        opens = [
            v
            for v in range(1 << k)
            if all(_preimage(q, u, v) in t.opens for u in range(q.monoid.size))
        ]
        return FiniteTopology(k, frozenset(opens))
    if mode != "preorder":
        raise ValueError(f"unknown mode {mode!r}")
    return FiniteTopology.from_neighborhoods(_class_neighborhoods(q, t))


def _class_neighborhoods(q: QuotientGlobalization, t: FiniteTopology) -> list[int]:
    k = q.size
    succ = [0] * k
    for u in range(q.monoid.size):
        for x in range(q.n_points):
            c = q.class_of(u, x)
            for x2 in bits(t.nbhd(x)):
                succ[c] |= 1 << q.class_of(u, x2)
    # transitive closure
    nb = [succ[c] | 1 << c for c in range(k)]
    changed = True
    while changed:
        changed = False
        for c in range(k):
            m = nb[c]
            for d in bits(m):
                m |= nb[d]
            if m != nb[c]:
                nb[c] = m
                changed = True
    return nb


@dataclass
class EmbeddingReport:
    passed: bool
    injective: bool
    witness: list[int] | None = None


def check_embedding(q: QuotientGlobalization, t: FiniteTopology) -> EmbeddingReport:
    """Does i: X -> Y carry t onto the subspace topology of i(X)?

    On failure ``witness`` is an open set U of X with no open V of Y such
    that V ∩ i(X) = i(U) (or, for a non-injective i, the colliding points).
    """
    n = q.n_points
    img = [q.embed(x) for x in range(n)]
    if len(set(img)) != n:
        seen: dict = {}
        for x, c in enumerate(img):
            if c in seen:
                return EmbeddingReport(False, False, [seen[c], x])
            seen[c] = x
    ynb = _class_neighborhoods(q, t)
    pos = {c: x for x, c in enumerate(img)}
    for x in range(n):
        trace = to_mask(pos[c] for c in bits(ynb[img[x]]) if c in pos)
        if trace != t.nbhd(x):
            return EmbeddingReport(False, True, bits(t.nbhd(x)))
    return EmbeddingReport(True, True)


@dataclass
class T1Report:
    y_is_T1: bool
    preimage_criterion: bool
    agree: bool
    x_is_T1: bool
    failures: list = field(default_factory=list)


def check_T1(q: QuotientGlobalization, t: FiniteTopology) -> T1Report:
    """Singletons of Y closed, versus: every {y : u·y = x} closed in X."""
    ynb = _class_neighborhoods(q, t)
    side_a = all(ynb[c] == 1 << c for c in range(q.size))
    ma = q.action
    fails = []
    for u, x in product(range(ma.monoid.size), range(q.n_points)):
        pre = to_mask(y for y, z in enumerate(ma.maps[u]) if z == x)
        if not t.is_closed(pre):
            fails.append((ma.monoid.names[u], ma.space.names[x]))
    side_b = not fails
    return T1Report(side_a, side_b, side_a == side_b, t.is_T1, fails)


def _image_in_Y(q: QuotientGlobalization, u: int, s: int) -> int:
    return to_mask(q.class_of(u, x) for x in bits(s))


def is_closed_map_into_Y(q: QuotientGlobalization, t: FiniteTopology, u: int) -> bool:
    ty = globalization_topology(q, t)
    return all(
        ty.is_closed(_image_in_Y(q, u, t.full & ~o)) for o in t.opens
    )


def is_open_map_into_Y(q: QuotientGlobalization, t: FiniteTopology, u: int) -> bool:
    ty = globalization_topology(q, t)
    return all(ty.is_open(_image_in_Y(q, u, o)) for o in t.opens)


def is_continuous_into_Y(q: QuotientGlobalization, t: FiniteTopology, u: int) -> bool:
    ty = globalization_topology(q, t)
    return all(_preimage(q, u, v) in t.opens for v in ty.opens)
