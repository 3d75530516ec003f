"""Partial monoid actions on finite point sets.

A :class:`PartialAction` pairs a presentation with one partial self-map of
the point set per generator.  Configurations ``(word, point)`` are rewritten
by the word rules and by the action step ``(..., g_1, x) -> (..., g_1(x))``,
which only ever fires at the rightmost letter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import TYPE_CHECKING, Iterable, Mapping, NamedTuple, Sequence

from .common import PreconditionError, Word
from .words import (
    ConfluenceReport,
    Counterexample,
    Presentation,
    check_word_confluence,
    find_redex,
    is_normal,
    normal_words,
)

if TYPE_CHECKING:
    from .fintop import FiniteTopology
    from .metglob import WeakPseudometric


class Config(NamedTuple):
    word: Word
    point: int


class NormalElement(NamedTuple):
    """A configuration in normal form; the canonical name of a point of Y."""

    word: Word
    point: int


@dataclass(frozen=True)
class Space:
    names: tuple[str, ...]
    metric: "WeakPseudometric | None" = None
    topology: "FiniteTopology | None" = None

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown point {name!r}") from None

    @classmethod
    def of_size(cls, n: int, metric=None, topology=None) -> "Space":
        return cls(tuple(str(i) for i in range(n)), metric, topology)


PartialMap = tuple  # images[x] is an int or None


def partial_map(n: int, mapping: Mapping[int, int]) -> PartialMap:
    images = [None] * n
    for x, y in mapping.items():
        images[x] = y
    return tuple(images)


def map_domain(f: PartialMap) -> frozenset[int]:
    return frozenset(x for x, y in enumerate(f) if y is not None)


@dataclass(frozen=True)
class PartialAction:
    presentation: Presentation
    space: Space
    maps: tuple[PartialMap, ...]

    def __post_init__(self):
        p, n = self.presentation, self.space.size
        if len(self.maps) != p.size:
            raise ValueError(f"expected {p.size} generator maps, got {len(self.maps)}")
        for g, f in enumerate(self.maps):
            if len(f) != n:
                raise ValueError(f"map of {p.generators[g]!r} has wrong length")
            for y in f:
                if y is not None and not 0 <= y < n:
                    raise ValueError(f"map of {p.generators[g]!r} leaves the point set")

    @classmethod
    def build(
        cls,
        presentation: Presentation,
        space: Space,
        maps: Mapping[str, Mapping[str, str]],
    ) -> "PartialAction":
        """Build from names: ``maps[gen][point] = image point``."""
        out = []
        for g in presentation.generators:
            if g not in maps:
                raise ValueError(f"no partial map given for generator {g!r}")
            out.append(
                partial_map(space.size, {space.index(x): space.index(y) for x, y in maps[g].items()})
            )
        return cls(presentation, space, tuple(out))

    @property
    def n(self) -> int:
        return self.space.size

    def dom(self, g: int) -> frozenset[int]:
        return map_domain(self.maps[g])

    @cached_property
    def confluence(self) -> ConfluenceReport:
        return check_action_confluence(self)

    def require_confluent(self) -> None:
        if not self.confluence.confluent:
            raise PreconditionError("the partial action is not confluent")

    def show(self, c) -> str:
        word, x = c
        name = self.space.names[x]
        return name if not word else f"{self.presentation.show(word)}·{name}"


# -- rewriting on G* x X ------------------------------------------------------


def apply_gen(a: PartialAction, g: int, x: int) -> int | None:
    return a.maps[g][x]


def config_reducts(a: PartialAction, c: Config) -> frozenset[Config]:
    word, x = c
    out = set()
    for r in a.presentation.rules:
        k = len(r.lhs)
        for i in range(len(word) - k + 1):
            if word[i : i + k] == r.lhs:
                out.add(Config(word[:i] + r.rhs + word[i + k :], x))
    if word:
        y = a.maps[word[-1]][x]
        if y is not None:
            out.add(Config(word[:-1], y))
    return frozenset(out)


def is_normal_config(a: PartialAction, c: Config) -> bool:
    word, x = c
    if word and a.maps[word[-1]][x] is not None:
        return False
    return is_normal(a.presentation, word)


def normalize_config(a: PartialAction, c: Config) -> NormalElement:
    """Action step at the rightmost letter when enabled, else leftmost word rule."""
    p = a.presentation
    p.require_terminating()
    word, x = tuple(c[0]), c[1]
    maps = a.maps
    while True:
        while word and maps[word[-1]][x] is not None:
            x = maps[word[-1]][x]
            word = word[:-1]
        hit = find_redex(p, word)
        if hit is None:
            return NormalElement(word, x)
        i, r = hit
        word = word[:i] + r.rhs + word[i + len(r.lhs) :]


def random_normal_form(a: PartialAction, c: Config, rng: random.Random) -> Config:
    """Reduce by picking a uniformly random one-step reduct until normal."""
    c = Config(tuple(c[0]), c[1])
    while True:
        nxt = config_reducts(a, c)
        if not nxt:
            return c
        c = rng.choice(sorted(nxt))


def check_action_confluence(a: PartialAction) -> ConfluenceReport:
    """Word confluence plus the mixed peaks ``lhs . x`` with x in dom(lhs[-1])."""
    p = a.presentation
    p.require_terminating()
    words = check_word_confluence(p)
    bad = list(words.counterexamples)
    for r in p.rules:
        g1 = r.lhs[-1]
        for x in sorted(a.dom(g1)):
            peak = Config(r.lhs, x)
            s1 = Config(r.rhs, x)
            s2 = Config(r.lhs[:-1], a.maps[g1][x])
            n1, n2 = normalize_config(a, s1), normalize_config(a, s2)
            if n1 != n2:
                bad.append(Counterexample(peak, s1, s2, n1, n2))
    return ConfluenceReport(not bad, tuple(bad))


def act(a: PartialAction, u: Word, x: int) -> int | None:
    nf = normalize_config(a, Config(tuple(u), x))
    return nf.point if not nf.word else None


def _require_normal_word(a: PartialAction, u: Word) -> None:
    if not is_normal(a.presentation, tuple(u)):
        raise ValueError(f"word {a.presentation.show(tuple(u))} is not normal")


def dom_of(a: PartialAction, u: Word) -> frozenset[int]:
    u = tuple(u)
    _require_normal_word(a, u)
    dom = frozenset(range(a.n))
    # dom(g_n ... g_1) = g_1^{-1}[dom(g_n ... g_2)], unrolled from the left
    for g in u:
        dom = frozenset(x for x in range(a.n) if a.maps[g][x] is not None and a.maps[g][x] in dom)
    return dom


def r_set(a: PartialAction, u: Word) -> frozenset[int]:
    u = tuple(u)
    _require_normal_word(a, u)
    if not u:
        return frozenset(range(a.n))
    return frozenset(range(a.n)) - a.dom(u[-1])


# -- structural predicates ----------------------------------------------------


def is_nowhere_degenerate(a: PartialAction) -> bool:
    return all(a.dom(g) for g in range(a.presentation.size))


def _zero_closed(a: PartialAction, s: frozenset[int]) -> bool:
    d = a.space.metric.dist
    return all(y in s for x in s for y in range(a.n) if d[x][y] == 0)


def _domain_check(a: PartialAction, which: str) -> bool:
    sp = a.space
    doms = [a.dom(g) for g in range(a.presentation.size)]
    if sp.topology is not None:
        from .common import to_mask

        t = sp.topology
        test = t.is_closed if which == "closed" else t.is_open
        return all(test(to_mask(s)) for s in doms)
    if sp.metric is not None:
        # open and closed sets of a finite pseudometric space coincide:
        # unions of zero-distance classes
        return all(_zero_closed(a, s) for s in doms)
    raise PreconditionError("closedness needs a topology or a metric on the space")


def is_closed_action(a: PartialAction) -> bool:
    return _domain_check(a, "closed")


def is_open_action(a: PartialAction) -> bool:
    return _domain_check(a, "open")


# -- builders ------------------------------------------------------------------


@dataclass(frozen=True)
class Morphism:
    """A map between two subsets of the point set, i.e. a morphism of S(X)."""

    name: str
    source: frozenset[int]
    target: frozenset[int]
    mapping: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, name: str, source, target, mapping: Mapping[int, int]) -> "Morphism":
        source, target = frozenset(source), frozenset(target)
        if set(mapping) != set(source):
            raise ValueError(f"morphism {name!r}: mapping must be total on its source")
        if not set(mapping.values()) <= target:
            raise ValueError(f"morphism {name!r}: image not inside target")
        return cls(name, source, target, tuple(sorted(mapping.items())))

    @property
    def as_dict(self) -> dict[int, int]:
        return dict(self.mapping)

    @property
    def is_identity(self) -> bool:
        return self.source == self.target and all(x == y for x, y in self.mapping)

    @property
    def signature(self):
        return (self.source, self.target, self.mapping)

    def after(self, g: "Morphism") -> "Morphism":
        """self ∘ g (g first); requires g.target == self.source."""
        f = self.as_dict
        return Morphism(
            f"{self.name}.{g.name}",
            g.source,
            self.target,
            tuple(sorted((x, f[y]) for x, y in g.mapping)),
        )

    def inverse(self) -> "Morphism":
        inv = {y: x for x, y in self.mapping}
        if len(inv) != len(self.mapping) or set(inv) != set(self.target):
            raise ValueError(f"morphism {self.name!r} is not invertible")
        return Morphism(f"{self.name}^-1", self.target, self.source, tuple(sorted(inv.items())))


def close_under_composition(
    morphisms: Iterable[Morphism], with_inverses: bool = False, limit: int = 5000
) -> list[Morphism]:
    """Smallest list containing ``morphisms`` closed under composition (and
    inverses), identities dropped.  Input order is kept; new ones are appended."""
    out: list[Morphism] = []
    seen = set()

    def add(m: Morphism):
        if m.is_identity or m.signature in seen:
            return
        seen.add(m.signature)
        out.append(m)
        if len(out) > limit:
            raise ValueError(f"category closure exceeds {limit} morphisms")

    for m in morphisms:
        add(m)
    if with_inverses:
        for m in list(out):
            add(m.inverse())
    i = 0
    while i < len(out):
        for j in range(i + 1):
            f, g = out[i], out[j]
            for a, b in ((f, g), (g, f)):
                if b.target == a.source:
                    add(a.after(b))
        i += 1
    return out


def from_category(space: Space, morphisms: Sequence[Morphism]) -> PartialAction:
    """Action of the monoid obtained by identifying all objects of a category
    of partial maps: generators are the non-identity morphisms, rules are
    ``(f, g) -> (f∘g)``, or ``-> ()`` when ``f∘g`` is an identity."""
    gens = [m for m in morphisms if not m.is_identity]
    by_sig: dict = {}
    for i, m in enumerate(gens):
        if m.signature in by_sig:
            raise ValueError(f"morphism {m.name!r} listed twice")
        by_sig[m.signature] = i
    names = [m.name for m in gens]
    if len(set(names)) != len(names):
        raise ValueError("morphism names are not unique")
    rules = []
    for f in gens:
        for g in gens:
            if g.target != f.source:
                continue
            comp = f.after(g)
            if comp.is_identity:
                rules.append(([f.name, g.name], []))
            elif comp.signature in by_sig:
                rules.append(([f.name, g.name], [gens[by_sig[comp.signature]].name]))
            else:
                raise ValueError(f"composite {f.name}∘{g.name} missing from the morphism list")
    p = Presentation.build(names, rules)
    maps = tuple(partial_map(space.size, m.as_dict) for m in gens)
    return PartialAction(p, space, maps)


def singleton_homogeneous_action(space: Space) -> PartialAction:
    """Free homogeneous space over X: all maps between distinct singletons.

    Generator ``(xy)`` sends ``y`` to ``x``.
    """
    if space.size < 2:
        raise ValueError("need at least two points")
    short = all(len(s) == 1 for s in space.names)
    morphisms = []
    for x, y in product(range(space.size), repeat=2):
        if x == y:
            continue
        nx, ny = space.names[x], space.names[y]
        name = f"({nx}{ny})" if short else f"({nx},{ny})"
        morphisms.append(Morphism.make(name, {y}, {x}, {y: x}))
    return from_category(space, morphisms)


# -- finite monoids given by tables ------------------------------------------


@dataclass(frozen=True)
class FiniteMonoid:
    names: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    unit: int

    @classmethod
    def build(cls, names: Sequence[str], table: Sequence[Sequence[str]], unit: str) -> "FiniteMonoid":
        ids = {x: i for i, x in enumerate(names)}
        m = cls(tuple(names), tuple(tuple(ids[c] for c in row) for row in table), ids[unit])
        m.validate()
        return m

    @property
    def size(self) -> int:
        return len(self.names)

    def mul(self, u: int, v: int) -> int:
        return self.table[u][v]

    def validate(self) -> None:
        n = self.size
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValueError("multiplication table must be square")
        e = self.unit
        for u in range(n):
            if self.table[e][u] != u or self.table[u][e] != u:
                raise ValueError(f"unit law fails at {self.names[u]!r}")
        for u, v, w in product(range(n), repeat=3):
            if self.table[self.table[u][v]][w] != self.table[u][self.table[v][w]]:
                raise ValueError(
                    f"associativity fails at ({self.names[u]}, {self.names[v]}, {self.names[w]})"
                )


@dataclass(frozen=True)
class MonoidPartialAction:
    """A partial action given per monoid element (not per generator)."""

    monoid: FiniteMonoid
    space: Space
    maps: tuple[PartialMap, ...]

    @classmethod
    def build(cls, monoid: FiniteMonoid, space: Space, maps: Mapping[str, Mapping[str, str]]):
        out = []
        for u, name in enumerate(monoid.names):
            if u == monoid.unit:
                out.append(tuple(range(space.size)))
                continue
            m = maps.get(name, {})
            out.append(partial_map(space.size, {space.index(x): space.index(y) for x, y in m.items()}))
        return cls(monoid, space, tuple(out))

    @property
    def n(self) -> int:
        return self.space.size

    def dom(self, u: int) -> frozenset[int]:
        return map_domain(self.maps[u])

    def validate(self) -> None:
        """Unit acts as identity and (uv)·x = u·(v·x) strongly whenever v·x is defined."""
        m, n = self.monoid, self.n
        if len(self.maps) != m.size:
            raise ValueError("one partial map per monoid element required")
        if any(self.maps[m.unit][x] != x for x in range(n)):
            raise ValueError("the unit must act as the identity")
        for u, v, x in product(range(m.size), range(m.size), range(n)):
            vx = self.maps[v][x]
            if vx is None:
                continue
            lhs = self.maps[m.mul(u, v)][x]
            rhs = self.maps[u][vx]
            if lhs != rhs:
                raise ValueError(
                    f"inconsistent action data: ({m.names[u]}{m.names[v]})·{self.space.names[x]} "
                    f"!= {m.names[u]}·({m.names[v]}·{self.space.names[x]})"
                )


def trivial_presentation_action(ma: MonoidPartialAction) -> PartialAction:
    """The same action over the presentation whose generators are all
    non-unit elements, with rules ``uv -> (uv)`` or ``uv -> ()``."""
    m = ma.monoid
    gens = [u for u in range(m.size) if u != m.unit]
    names = [m.names[u] for u in gens]
    rules = []
    for u in gens:
        for v in gens:
            w = m.mul(u, v)
            rules.append(([m.names[u], m.names[v]], [] if w == m.unit else [m.names[w]]))
    p = Presentation.build(names, rules)
    return PartialAction(p, ma.space, tuple(ma.maps[u] for u in gens))


# -- the triple property --------------------------------------------------------


def triple_condition_check(a, bound: int = 2) -> list[tuple]:
    """Triples (u1, u2, u3) with no w such that every u_i·X ∩ u_{i+1}·X ⊂ w·X.

    For a :class:`PartialAction` the elements of Y are normal forms and the
    u_i, w range over normal words of length <= bound.  For a
    :class:`MonoidPartialAction` they range over the whole monoid and Y is
    the union-find quotient.  Triples are reported by element names.
    """
    if isinstance(a, MonoidPartialAction):
        from .glob import finite_monoid_globalization

        q = finite_monoid_globalization(a)
        labels = list(a.monoid.names)
        images = [frozenset(q.class_of(u, x) for x in range(a.n)) for u in range(a.monoid.size)]
    else:
        p = a.presentation
        words = normal_words(p, bound)
        labels = [p.show(w) if w else "e" for w in words]
        images = [frozenset(normalize_config(a, Config(w, x)) for x in range(a.n)) for w in words]
    k = len(images)
    # members[y] = bitmask of indices w with y in w·X
    members: dict = {}
    for i, img in enumerate(images):
        for y in img:
            members[y] = members.get(y, 0) | (1 << i)
    full = (1 << k) - 1
    bad = []
    for i, j, l in product(range(k), repeat=3):
        need = (images[i] & images[j]) | (images[j] & images[l]) | (images[l] & images[i])
        ok = full
        for y in need:
            ok &= members[y]
            if not ok:
                break
        if not ok:
            bad.append((labels[i], labels[j], labels[l]))
    return bad
