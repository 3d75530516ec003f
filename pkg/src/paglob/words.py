"""Monoid presentations as string rewriting systems.

Words are tuples of generator ids written left to right as
``(g_n, ..., g_2, g_1)``: the rightmost letter ``g_1`` is the one that acts
first on a point.  Termination is certified by the shortlex order induced by
a user-supplied precedence on generators; confluence is then decided by
joining critical pairs.

    >>> p = Presentation.build(["a", "b", "B"],
    ...     [("bB", ""), ("Bb", ""), ("aa", ""), ("ab", "Ba"), ("aB", "ba")])
    >>> p.show(normalize_word(p, p.word("abBa")))
    '()'
    >>> check_word_confluence(p).confluent
    True
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

from .common import PreconditionError, ValidationReport, Word


@dataclass(frozen=True)
class Rule:
    lhs: Word
    rhs: Word
    index: int


@dataclass(frozen=True)
class Counterexample:
    peak: object
    reduct1: object
    reduct2: object
    nf1: object
    nf2: object


@dataclass(frozen=True)
class ConfluenceReport:
    confluent: bool
    counterexamples: tuple[Counterexample, ...] = ()

    @property
    def status(self) -> str:
        return "Confluent" if self.confluent else "NotConfluent"

    def __bool__(self) -> bool:
        return self.confluent


@dataclass(frozen=True)
class Presentation:
    """Generators, directed rules and a generator precedence.

    ``precedence`` lists generator ids from greatest to least.  ``inverses``
    optionally declares a group structure (``inverses[g]`` is the id of the
    formal inverse of ``g``).  ``max_steps`` is an escape hatch for
    presentations without a shortlex certificate: normalization then runs
    under a step budget instead of being refused.
    """

    generators: tuple[str, ...]
    rules: tuple[Rule, ...]
    precedence: tuple[int, ...]
    inverses: tuple[int, ...] | None = None
    max_steps: int | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        generators: Sequence[str],
        rules: Iterable[tuple[Sequence[str] | str, Sequence[str] | str]] = (),
        precedence: Sequence[str] | None = None,
        inverses: dict[str, str] | None = None,
        max_steps: int | None = None,
    ) -> "Presentation":
        """Build from generator names.

        Rule sides are sequences of names; a plain string is split into
        single characters, so ``"ab"`` means ``("a", "b")``.
        """
        gens = tuple(generators)
        ids = {name: i for i, name in enumerate(gens)}

        def enc(w) -> Word:
            letters = list(w) if isinstance(w, str) else list(w)
            try:
                return tuple(ids[x] for x in letters)
            except KeyError as exc:
                raise ValueError(f"unknown generator {exc.args[0]!r}") from None

        rule_objs = tuple(Rule(enc(l), enc(r), i) for i, (l, r) in enumerate(rules))
        if precedence is None:
            prec = tuple(range(len(gens)))
        else:
            prec = tuple(ids[x] for x in precedence)
        inv = None
        if inverses is not None:
            inv_list = [-1] * len(gens)
            for g, h in inverses.items():
                inv_list[ids[g]] = ids[h]
                inv_list[ids[h]] = ids[g]
            if -1 in inv_list:
                missing = gens[inv_list.index(-1)]
                raise ValueError(f"no inverse declared for generator {missing!r}")
            inv = tuple(inv_list)
        return cls(gens, rule_objs, prec, inv, max_steps)

    def __post_init__(self):
        by_first: dict[int, list[Rule]] = {}
        for r in sorted(self.rules, key=lambda r: r.index):
            if r.lhs:
                by_first.setdefault(r.lhs[0], []).append(r)
        by_last: dict[int, list[Rule]] = {}
        for r in self.rules:
            if r.lhs:
                by_last.setdefault(r.lhs[-1], []).append(r)
        rank = [0] * len(self.generators)
        n = len(self.precedence)
        for pos, g in enumerate(self.precedence):
            if 0 <= g < len(rank):
                rank[g] = n - 1 - pos
        object.__setattr__(self, "_index", {"first": by_first, "last": by_last, "rank": rank})

    # -- naming ---------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.generators)

    def gen_id(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise ValueError(f"unknown generator {name!r}") from None

    def word(self, letters: Sequence[str] | str) -> Word:
        if isinstance(letters, str) and letters not in self.generators:
            letters = list(letters)
        elif isinstance(letters, str):
            letters = [letters]
        return tuple(self.gen_id(x) for x in letters)

    def names(self, w: Word) -> list[str]:
        return [self.generators[g] for g in w]

    def show(self, w: Word) -> str:
        if not w:
            return "()"
        if all(len(x) == 1 for x in self.generators):
            return "".join(self.names(w))
        return " ".join(self.names(w))

    # -- shortlex -------------------------------------------------------

    def word_key(self, w: Word) -> tuple:
        rank = self._index["rank"]
        return (len(w), tuple(rank[g] for g in w))

    def shortlex_greater(self, u: Word, v: Word) -> bool:
        return self.word_key(u) > self.word_key(v)

    # -- certification --------------------------------------------------

    @cached_property
    def validation(self) -> ValidationReport:
        return validate_presentation(self)

    @property
    def certified(self) -> bool:
        return self.validation.valid

    def require_terminating(self) -> None:
        if not self.certified and self.max_steps is None:
            raise PreconditionError(
                "presentation has no valid shortlex certificate: "
                + "; ".join(self.validation.violations)
            )

    @cached_property
    def confluence(self) -> ConfluenceReport:
        return check_word_confluence(self)

    def rules_ending_with(self, g: int) -> list[Rule]:
        return self._index["last"].get(g, [])

    def rules_starting_with(self, g: int) -> list[Rule]:
        return self._index["first"].get(g, [])


def validate_presentation(p: Presentation) -> ValidationReport:
    violations = []
    n = len(p.generators)
    if len(set(p.generators)) != n:
        violations.append("generator names are not unique")
    if any(not name for name in p.generators):
        violations.append("empty generator name")
    if sorted(p.precedence) != list(range(n)):
        violations.append("precedence is not a total order on all generators")
    seen = set()
    for r in p.rules:
        label = f"rule {r.index}"
        if any(not 0 <= g < n for g in r.lhs + r.rhs):
            violations.append(f"{label}: letter out of range")
            continue
        text = f"{label} {p.show(r.lhs)} -> {p.show(r.rhs)}"
        if len(r.lhs) < 2:
            violations.append(f"{text}: left side shorter than two letters")
        if not p.shortlex_greater(r.lhs, r.rhs):
            violations.append(f"{text}: not shortlex-decreasing")
        if (r.lhs, r.rhs) in seen:
            violations.append(f"{text}: duplicate rule")
        seen.add((r.lhs, r.rhs))
    if p.inverses is not None:
        if len(p.inverses) != n or any(p.inverses[p.inverses[g]] != g for g in range(n)):
            violations.append("inverse declaration is not an involution")
    return ValidationReport(not violations, violations)


def _occurrences(w: Word, lhs: Word) -> Iterator[int]:
    k = len(lhs)
    for i in range(len(w) - k + 1):
        if w[i : i + k] == lhs:
            yield i


def one_step_reducts(p: Presentation, w: Word) -> frozenset[Word]:
    out = set()
    for r in p.rules:
        k = len(r.lhs)
        for i in _occurrences(w, r.lhs):
            out.add(w[:i] + r.rhs + w[i + k :])
    return frozenset(out)


def is_normal(p: Presentation, w: Word) -> bool:
    return find_redex(p, w) is None


def find_redex(p: Presentation, w: Word, start: int = 0) -> tuple[int, Rule] | None:
    """Leftmost redex at or after ``start``; ties broken by lowest rule index."""
    for i in range(start, len(w)):
        for r in p.rules_starting_with(w[i]):
            if w[i : i + len(r.lhs)] == r.lhs:
                return i, r
    return None


def normalize_word(p: Presentation, w: Word, max_steps: int | None = None) -> Word:
    p.require_terminating()
    budget = max_steps if max_steps is not None else (None if p.certified else p.max_steps)
    w = tuple(w)
    longest = max((len(r.lhs) for r in p.rules), default=0)
    steps = 0
    start = 0
    while True:
        hit = find_redex(p, w, start)
        if hit is None:
            return w
        i, r = hit
        w = w[:i] + r.rhs + w[i + len(r.lhs) :]
        # a new redex can only start within one lhs-length of the rewrite
        start = max(0, i - longest + 1)
        steps += 1
        if budget is not None and steps > budget:
            raise RuntimeError(f"normalization exceeded step budget {budget}")


def critical_pairs(p: Presentation) -> list[tuple[Word, Word, Word]]:
    """Peaks from proper overlaps and containments of left sides.

    Each peak carries its two one-step reducts, ordered shortlex ascending.
    """
    seen = set()
    out = []

    def emit(peak, s1, s2):
        if p.word_key(s2) < p.word_key(s1):
            s1, s2 = s2, s1
        key = (peak, s1, s2)
        if key not in seen:
            seen.add(key)
            out.append(key)

    for r1 in p.rules:
        l1 = r1.lhs
        for r2 in p.rules:
            l2 = r2.lhs
            # suffix of l1 overlaps prefix of l2
            for k in range(1, min(len(l1), len(l2))):
                if l1[-k:] == l2[:k]:
                    peak = l1 + l2[k:]
                    emit(peak, r1.rhs + l2[k:], l1[: len(l1) - k] + r2.rhs)
            # l2 inside l1
            if r1 is not r2 and len(l2) <= len(l1):
                for i in _occurrences(l1, l2):
                    emit(l1, r1.rhs, l1[:i] + r2.rhs + l1[i + len(l2) :])
    return out


def check_word_confluence(p: Presentation) -> ConfluenceReport:
    bad = []
    for peak, s1, s2 in critical_pairs(p):
        n1, n2 = normalize_word(p, s1), normalize_word(p, s2)
        if n1 != n2:
            bad.append(Counterexample(peak, s1, s2, n1, n2))
    return ConfluenceReport(not bad, tuple(bad))


def is_prefix(p: Presentation, u: Word, v: Word) -> bool:
    return len(u) <= len(v) and tuple(v[: len(u)]) == tuple(u)


def meet(p: Presentation, u: Word, v: Word) -> Word:
    k = 0
    for a, b in zip(u, v):
        if a != b:
            break
        k += 1
    return tuple(u[:k])


def imprefix(p: Presentation, u: Word) -> Word:
    if not u:
        raise ValueError("the empty word has no direct predecessor")
    return tuple(u[:-1])


def lg(u: Word) -> int:
    return len(u)


def multiply_normal(p: Presentation, u: Word, v: Word) -> Word:
    return normalize_word(p, tuple(u) + tuple(v))


def inverse_word(p: Presentation, u: Word) -> Word:
    if p.inverses is None:
        raise PreconditionError("presentation declares no group structure")
    return tuple(p.inverses[g] for g in reversed(u))


def normal_words(p: Presentation, n: int) -> list[Word]:
    """All normal words of length <= n, by depth-first extension on the right.

    Only suffixes of the extended word need checking since its prefix is
    already normal.  Returned in shortlex order.
    """
    out: list[Word] = [()]

    def extend(w: Word):
        if len(w) == n:
            return
        for g in range(p.size):
            v = w + (g,)
            if any(v[-len(r.lhs) :] == r.lhs for r in p.rules_ending_with(g) if len(r.lhs) <= len(v)):
                continue
            out.append(v)
            extend(v)

    extend(())
    out.sort(key=p.word_key)
    return out


def all_words(p: Presentation, n: int) -> Iterator[Word]:
    for k in range(n + 1):
        yield from product(range(p.size), repeat=k)
