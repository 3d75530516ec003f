"""The set-level universal globalization Y.

Two backends, never mixed: for confluent actions an element of Y is its
normal form ``(word, point)``; for finite monoids given by a table, Y is the
quotient of M x X computed with union-find.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .common import Word
from .paction import (
    Config,
    MonoidPartialAction,
    NormalElement,
    PartialAction,
    normalize_config,
)
from .words import normal_words


def embed(x: int) -> NormalElement:
    return NormalElement((), x)


def act_on_element(a: PartialAction, u: Word, el: Sequence) -> NormalElement:
    return normalize_config(a, Config(tuple(u) + tuple(el[0]), el[1]))


def is_equivalent(a: PartialAction, c1: Sequence, c2: Sequence) -> bool:
    return normalize_config(a, Config(tuple(c1[0]), c1[1])) == normalize_config(
        a, Config(tuple(c2[0]), c2[1])
    )


def element_key(a: PartialAction, el: Sequence) -> tuple:
    """Canonical order: shortlex on the word, then point index."""
    return (a.presentation.word_key(tuple(el[0])), el[1])


def lg(el: Sequence) -> int:
    return len(el[0])


@dataclass(frozen=True)
class Truncation:
    bound: int
    elements: tuple[NormalElement, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, el) -> int:
        return self.elements.index(NormalElement(tuple(el[0]), el[1]))


def enumerate_truncation(a: PartialAction, n: int) -> Truncation:
    """Y_n: every normal element of length <= n, each once, in canonical order."""
    a.require_confluent()
    everything = frozenset(range(a.n))
    out = []
    for w in normal_words(a.presentation, n):
        pts = everything if not w else everything - a.dom(w[-1])
        out.extend(NormalElement(w, x) for x in sorted(pts))
    out.sort(key=lambda el: element_key(a, el))
    return Truncation(n, tuple(out))


# -- union-find backend ----------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # smaller index wins so roots are canonical
            if rj < ri:
                ri, rj = rj, ri
            self.parent[rj] = ri


@dataclass(frozen=True)
class QuotientGlobalization:
    """M x X modulo the equivalence generated by (uv, x) ~ (u, v·x).

    ``classes[c]`` lists the members ``(u, x)`` of class ``c``; classes are
    numbered by their smallest member ``u * |X| + x``.
    """

    action: MonoidPartialAction
    node_class: tuple[int, ...]
    classes: tuple[tuple[tuple[int, int], ...], ...]
    translate: tuple[tuple[int, ...], ...]  # translate[u][c] = class of u·c

    @property
    def monoid(self):
        return self.action.monoid

    @property
    def n_points(self) -> int:
        return self.action.n

    @property
    def size(self) -> int:
        return len(self.classes)

    def class_of(self, u: int, x: int) -> int:
        return self.node_class[u * self.n_points + x]

    def embed(self, x: int) -> int:
        return self.class_of(self.monoid.unit, x)

    def label(self, c: int) -> str:
        u, x = self.classes[c][0]
        m, names = self.monoid, self.action.space.names
        return names[x] if u == m.unit else f"{m.names[u]}·{names[x]}"

    def members(self, c: int) -> list[tuple[str, str]]:
        m, names = self.monoid, self.action.space.names
        return [(m.names[u], names[x]) for u, x in self.classes[c]]


def finite_monoid_globalization(ma: MonoidPartialAction) -> QuotientGlobalization:
    ma.validate()
    m, n = ma.monoid, ma.n
    uf = _UnionFind(m.size * n)
    for u in range(m.size):
        for v in range(m.size):
            uv = m.mul(u, v)
            for x in range(n):
                vx = ma.maps[v][x]
                if vx is not None:
                    uf.union(uv * n + x, u * n + vx)
    roots = sorted({uf.find(i) for i in range(m.size * n)})
    cid = {r: k for k, r in enumerate(roots)}
    node_class = tuple(cid[uf.find(i)] for i in range(m.size * n))
    members: list[list[tuple[int, int]]] = [[] for _ in roots]
    for i, c in enumerate(node_class):
        members[c].append(divmod(i, n))
    translate = []
    for u in range(m.size):
        row = []
        for c in range(len(roots)):
            images = {node_class[m.mul(u, v) * n + x] for v, x in members[c]}
            if len(images) != 1:
                raise AssertionError("induced action is not well defined on classes")
            row.append(images.pop())
        translate.append(tuple(row))
    return QuotientGlobalization(
        ma, node_class, tuple(tuple(ms) for ms in members), tuple(translate)
    )
