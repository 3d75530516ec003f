"""Weak pseudometrics and the globalized distance on Y.

The distance between two normal elements is a shortest path in a small
graph: one copy of X per prefix of either endpoint word, copies joined by
zero-weight edges ``(w, z) -- (w[:-1], g_1(z))`` for ``z`` in ``dom(g_1)``.
:class:`BruteForceOracle` computes the same quantity straight from the
path-length definition and is what the tests check against.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

from .common import INF, PreconditionError, ValidationReport, Word
from .glob import Truncation, act_on_element, element_key, embed, enumerate_truncation
from .paction import (
    Config,
    Morphism,
    NormalElement,
    PartialAction,
    Space,
    close_under_composition,
    from_category,
    is_normal_config,
    normalize_config,
    r_set,
)
from .words import Presentation, all_words, inverse_word, is_prefix, normalize_word

TOL = 1e-9


@dataclass(frozen=True)
class WeakPseudometric:
    dist: tuple[tuple[float, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "WeakPseudometric":
        return cls(tuple(tuple(_as_distance(v) for v in row) for row in rows))

    @property
    def size(self) -> int:
        return len(self.dist)

    def __call__(self, x: int, y: int) -> float:
        return self.dist[x][y]

    def to_set(self, x: int, s: Iterable[int]) -> float:
        """d(x, S); +inf for empty S."""
        return min((self.dist[x][y] for y in s), default=INF)


def _as_distance(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity", "+inf"):
            return INF
        raise ValueError(f"bad distance {v!r}")
    v = float(v)
    if math.isnan(v) or v < 0:
        raise ValueError(f"bad distance {v!r}")
    return v


def validate_pseudometric(m: WeakPseudometric) -> ValidationReport:
    d, n = m.dist, m.size
    bad = []
    if any(len(row) != n for row in d):
        return ValidationReport(False, ["matrix is not square"])
    for i in range(n):
        if d[i][i] != 0:
            bad.append(f"d({i},{i}) = {d[i][i]} != 0")
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                bad.append(f"asymmetric at ({i},{j})")
    for i, j, k in product(range(n), repeat=3):
        if d[i][k] > d[i][j] + d[j][k] + TOL * max(1.0, d[i][k]) and d[i][j] + d[j][k] < INF:
            bad.append(f"triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")
    separated = all(d[i][j] > 0 for i in range(n) for j in range(n) if i != j)
    finite = all(v < INF for row in d for v in row)
    return ValidationReport(
        not bad, bad, {"separated": separated, "finite": finite, "metric": separated and finite}
    )


def _metric(a: PartialAction) -> WeakPseudometric:
    if a.space.metric is None:
        raise PreconditionError("the space carries no metric")
    return a.space.metric


def check_nonexpansive(a: PartialAction) -> bool:
    d = _metric(a)
    for f in a.maps:
        dom = [x for x, y in enumerate(f) if y is not None]
        for x in dom:
            for y in dom:
                if d(f[x], f[y]) > d(x, y) + TOL * max(1.0, d(f[x], f[y])):
                    return False
    return True


def _require_metric_action(a: PartialAction) -> WeakPseudometric:
    d = _metric(a)
    a.require_confluent()
    if not check_nonexpansive(a):
        raise PreconditionError("the partial action is not non-expansive")
    return d


def _normal(a: PartialAction, el: Sequence) -> NormalElement:
    return normalize_config(a, Config(tuple(el[0]), el[1]))


# -- prefix-graph search --------------------------------------------------------


def _prefixes(words: Iterable[Word]) -> set[Word]:
    out = set()
    for w in words:
        for k in range(len(w) + 1):
            out.add(tuple(w[:k]))
    return out


def _dijkstra(a: PartialAction, d: WeakPseudometric, copies: set[Word], source, target=None):
    """Shortest paths over X-copies indexed by a prefix-closed word set.

    Ties prefer the canonically smaller predecessor node.
    """
    n = a.n
    key = {w: a.presentation.word_key(w) for w in copies}

    def node_key(node):
        return (key[node[0]], node[1])

    def neighbours(node):
        w, z = node
        row = d.dist[z]
        for z2 in range(n):
            if z2 != z and row[z2] < INF:
                yield (w, z2), row[z2]
        if w:
            y = a.maps[w[-1]][z]
            if y is not None:
                yield (w[:-1], y), 0.0
        # reverse identification edges: (w + g, z2) with g(z2) = z
        for g in range(a.presentation.size):
            up = w + (g,)
            if up in copies:
                f = a.maps[g]
                for z2 in range(n):
                    if f[z2] == z:
                        yield (up, z2), 0.0

    dist = {source: 0.0}
    pred: dict = {source: None}
    done = set()
    heap = [(0.0, node_key(source), source)]
    while heap:
        du, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            break
        for v, wgt in neighbours(u):
            if v in done:
                continue
            nd = du + wgt
            old = dist.get(v, INF)
            if nd < old:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, node_key(v), v))
            elif nd == old and pred[v] is not None and node_key(u) < node_key(pred[v]):
                pred[v] = u
    return dist, pred


def distance(a: PartialAction, el1: Sequence, el2: Sequence) -> float:
    d = _require_metric_action(a)
    s, t = _normal(a, el1), _normal(a, el2)
    if s == t:
        return 0.0
    dist, _ = _dijkstra(a, d, _prefixes([s.word, t.word]), s, t)
    return dist.get(t, INF)


def distance_matrix(a: PartialAction, elements: Sequence) -> list[list[float]]:
    """All pairwise distances, one search per source over every prefix copy.

    Extra copies only add genuine paths, so this agrees with :func:`distance`.
    """
    d = _require_metric_action(a)
    els = [_normal(a, el) for el in elements]
    copies = _prefixes(el.word for el in els)
    out = []
    for s in els:
        dist, _ = _dijkstra(a, d, copies, s)
        out.append([0.0 if t == s else dist.get(t, INF) for t in els])
    return out


def cap_infinite(value: float, cap: float | None) -> float:
    return cap if cap is not None and value == INF else value


# -- brute-force oracle ----------------------------------------------------------


class BruteForceOracle:
    """Distances from the definition: minimum total length over S-paths.

    A segment ``(u, x, y)`` joins the normal forms of ``u·x`` and ``u·y`` at
    cost ``d(x, y)``; ``u`` ranges over *all* words of length <= depth (not
    just normal ones, and not just prefixes of the endpoints).  Shortest
    paths are found by hop-bounded relaxation.
    """

    def __init__(self, a: PartialAction, depth: int):
        self.a = a
        self.depth = depth
        d = _metric(a)
        edges: dict = {}
        for u in all_words(a.presentation, depth):
            ends = [normalize_config(a, Config(u, x)) for x in range(a.n)]
            for x in range(a.n):
                for y in range(x + 1, a.n):
                    w = d(x, y)
                    if w == INF or ends[x] == ends[y]:
                        continue
                    k = (ends[x], ends[y]) if ends[x] < ends[y] else (ends[y], ends[x])
                    if w < edges.get(k, INF):
                        edges[k] = w
        self.edges = [(p, q, w) for (p, q), w in edges.items()]

    def distances_from(self, el: Sequence, max_segments: int) -> dict:
        src = normalize_config(self.a, Config(tuple(el[0]), el[1]))
        dist = {src: 0.0}
        for _ in range(max_segments):
            new = dict(dist)
            changed = False
            for p, q, w in self.edges:
                dp, dq = dist.get(p, INF), dist.get(q, INF)
                if dp + w < new.get(q, INF):
                    new[q] = dp + w
                    changed = True
                if dq + w < new.get(p, INF):
                    new[p] = dq + w
                    changed = True
            dist = new
            if not changed:
                break
        return dist

    def distance(self, el1: Sequence, el2: Sequence, max_segments: int) -> float:
        tgt = normalize_config(self.a, Config(tuple(el2[0]), el2[1]))
        return self.distances_from(el1, max_segments).get(tgt, INF)


def distance_bruteforce(
    a: PartialAction, el1: Sequence, el2: Sequence, max_segments: int, depth: int | None = None
) -> float:
    """Upper bound on (and at sufficient depth equal to) :func:`distance`.

    ``depth`` defaults to ``max(lg) + max_segments``; that is exponential in
    the number of generators, so callers usually pass something smaller.
    """
    _metric(a)
    a.require_confluent()
    s, t = _normal(a, el1), _normal(a, el2)
    if depth is None:
        depth = max(len(s.word), len(t.word)) + max_segments
    return BruteForceOracle(a, depth).distance(s, t, max_segments)


# -- group case ------------------------------------------------------------------


def _require_group(p: Presentation) -> None:
    if p.inverses is None:
        raise PreconditionError("presentation declares no group structure")
    for g in range(p.size):
        if normalize_word(p, (g, p.inverses[g])) != ():
            raise PreconditionError(
                f"declared inverse of {p.generators[g]!r} does not cancel it"
            )


def distance_group_formula(a: PartialAction, u: Word, v: Word, x: int, y: int) -> float:
    """inf over x_i in dom(g_i) of d(y, x_1) + sum d(g_i(x_i), x_{i+1}), x_{k+1} = x,
    where g_k ... g_1 is the normal form of u^-1 v.  Exhaustive enumeration."""
    p = a.presentation
    _require_group(p)
    d = _metric(a)
    w = normalize_word(p, inverse_word(p, tuple(u)) + tuple(v))
    gs = list(reversed(w))  # gs[0] = g_1
    doms = [sorted(a.dom(g)) for g in gs]
    best = INF
    for choice in product(*doms):
        total = d(y, choice[0]) if choice else d(y, x)
        for i, g in enumerate(gs):
            nxt = choice[i + 1] if i + 1 < len(gs) else x
            total += d(a.maps[g][choice[i]], nxt)
        best = min(best, total)
    return best


# -- geodesics -------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicWitness:
    segments: tuple[tuple[Word, int, int], ...]
    form: str
    total: float
    pattern: str = ""


_FORMS = [
    ("A3", r"nn"),
    ("A1", r"nr(,nr)*"),
    ("A2", r"rn(,rn)*"),
    ("A4", r"(nr,)+nn"),
    ("A5", r"nn(,rn)+"),
    ("A6", r"(nr,)+nn(,rn)+"),
    ("A7", r"(nr,)+rn(,rn)*"),
]


def classify_path(a: PartialAction, segments: Sequence[tuple[Word, int, int]]) -> tuple[str | None, str]:
    """Tag a path with its normality pattern form A1..A7 (None if no match)."""

    def flag(w, z):
        return "n" if is_normal_config(a, Config(w, z)) else "r"

    pattern = ",".join(flag(w, x) + flag(w, y) for w, x, y in segments)
    for name, rx in _FORMS:
        if re.fullmatch(rx, pattern):
            return name, pattern
    return None, pattern


def _reduce_path(a: PartialAction, d: WeakPseudometric, segs: list) -> list:
    """Apply the two path reductions until none fires: push a segment whose
    endpoints are both reducible down one letter, and merge segments whose
    junction is literally the same configuration."""
    changed = True
    while changed:
        changed = False
        out = []
        for w, x, y in segs:
            while w and a.maps[w[-1]][x] is not None and a.maps[w[-1]][y] is not None:
                f = a.maps[w[-1]]
                w, x, y = w[:-1], f[x], f[y]
                changed = True
            out.append((w, x, y))
        segs = out
        if len(segs) > 1:
            kept = [s for s in segs if s[1] != s[2]]
            if len(kept) != len(segs):
                segs = kept or segs[:1]
                changed = True
        merged = [segs[0]]
        for w, x, y in segs[1:]:
            pw, px, py = merged[-1]
            if pw == w and py == x:
                merged[-1] = (w, px, y)
                changed = True
            else:
                merged.append((w, x, y))
        segs = merged
    return segs


def geodesic(a: PartialAction, el1: Sequence, el2: Sequence) -> GeodesicWitness | None:
    d = _require_metric_action(a)
    s, t = _normal(a, el1), _normal(a, el2)
    if s == t:
        return GeodesicWitness(((s.word, s.point, s.point),), "A3", 0.0, "nn")
    dist, pred = _dijkstra(a, d, _prefixes([s.word, t.word]), s, t)
    if t not in dist:
        return None
    nodes = [t]
    while pred[nodes[-1]] is not None:
        nodes.append(pred[nodes[-1]])
    nodes.reverse()
    segs = []
    for (w1, z1), (w2, z2) in zip(nodes, nodes[1:]):
        if w1 == w2:
            segs.append((w1, z1, z2))
    if not segs:
        segs = [(s.word, s.point, s.point)]
    segs = _reduce_path(a, d, segs)
    total = sum(d(x, y) for _, x, y in segs)
    form, pattern = classify_path(a, segs)
    if form is None:
        raise AssertionError(f"reduced geodesic has unexpected pattern {pattern}")
    return GeodesicWitness(tuple(segs), form, total, pattern)


def check_path(a: PartialAction, el1, el2, segments) -> bool:
    """Is ``segments`` an S-path from el1 to el2?"""
    if not segments:
        return False
    norm = lambda w, z: normalize_config(a, Config(tuple(w), z))
    if norm(segments[0][0], segments[0][1]) != _normal(a, el1):
        return False
    if norm(segments[-1][0], segments[-1][2]) != _normal(a, el2):
        return False
    for (w1, _, y1), (w2, x2, _) in zip(segments, segments[1:]):
        if norm(w1, y1) != norm(w2, x2):
            return False
    return True


# -- structural checks -----------------------------------------------------------


@dataclass
class SeparationReport:
    passed: bool
    min_distance: float
    min_pair: tuple | None
    zero_cross_pairs: list = field(default_factory=list)


def check_separated(a: PartialAction, n: int) -> SeparationReport:
    _require_metric_action(a)
    els = list(enumerate_truncation(a, n))
    dm = distance_matrix(a, els)
    best, pair, cross = INF, None, []
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            v = dm[i][j]
            if v < best:
                best, pair = v, (els[i], els[j])
            if v == 0 and els[i].word != els[j].word:
                cross.append((els[i], els[j]))
    passed = (pair is None or best > 0) and not cross
    return SeparationReport(passed, best, pair, cross)


@dataclass
class LocalIsometryReport:
    passed: bool
    checked: int
    violations: list = field(default_factory=list)


def check_local_isometry(a: PartialAction, u: Word) -> LocalIsometryReport:
    """Layer map u: R_u -> u·R_u is isometric on eps-balls, eps = d(x, dom(g_1)),
    and min{d(x,y), d(x,D)+d(y,D)} <= D(u·x, u·y) <= d(x,y) for all x, y in R_u."""
    d = _require_metric_action(a)
    u = tuple(u)
    if not u:
        return LocalIsometryReport(True, 0)
    dom1 = a.dom(u[-1])
    R = sorted(r_set(a, u))
    els = [NormalElement(u, x) for x in R]
    dm = distance_matrix(a, els)
    bad, checked = [], 0
    for i, x in enumerate(R):
        ex = d.to_set(x, dom1)
        for j, y in enumerate(R):
            D, dxy = dm[i][j], d(x, y)
            tol = TOL * max(1.0, dxy if dxy < INF else 1.0)
            lower = min(dxy, ex + d.to_set(y, dom1))
            checked += 1
            if not (lower - tol <= D <= dxy + tol):
                bad.append(("bounds", x, y, lower, D, dxy))
            if ex > 0 and dxy < ex and abs(D - dxy) > tol:
                bad.append(("ball", x, y, D, dxy))
    return LocalIsometryReport(not bad, checked, bad)


# -- gluing ----------------------------------------------------------------------


@dataclass(frozen=True)
class GluedSpace:
    """Pushout of X1 and X2 along an isometric partial bijection.

    Points are all of X1 followed by the points of X2 outside the
    identification; ``origin[i]`` is ``(1, x)`` or ``(2, y)``.
    """

    metric: WeakPseudometric
    origin: tuple[tuple[int, int], ...]
    action: PartialAction


def glue(
    m1: WeakPseudometric, m2: WeakPseudometric, ident: Sequence[tuple[int, int]]
) -> GluedSpace:
    n1, n2 = m1.size, m2.size
    ident = [(int(x), int(y)) for x, y in ident]
    if len({x for x, _ in ident}) != len(ident) or len({y for _, y in ident}) != len(ident):
        raise ValueError("identification is not a partial bijection")
    for (x, y), (x2, y2) in product(ident, repeat=2):
        if abs(m1(x, x2) - m2(y, y2)) > TOL * max(1.0, m1(x, x2)) and m1(x, x2) != m2(y, y2):
            raise ValueError("identification is not isometric")
    rows = [[INF] * (n1 + n2) for _ in range(n1 + n2)]
    for i, j in product(range(n1), repeat=2):
        rows[i][j] = m1(i, j)
    for i, j in product(range(n2), repeat=2):
        rows[n1 + i][n1 + j] = m2(i, j)
    space = Space(
        tuple(f"1:{i}" for i in range(n1)) + tuple(f"2:{j}" for j in range(n2)),
        WeakPseudometric.from_rows(rows),
    )
    p = Presentation.build(["u", "U"], [("uU", ""), ("Uu", "")], inverses={"u": "U"})
    fwd = {x: n1 + y for x, y in ident}
    bwd = {n1 + y: x for x, y in ident}
    from .paction import partial_map

    a = PartialAction(p, space, (partial_map(n1 + n2, fwd), partial_map(n1 + n2, bwd)))
    u = p.word("u")
    matched = {y for _, y in ident}
    # W = u·X1 ∪ X2; u·(x,1) for x in Z is already (y,2)
    points = [NormalElement(u, x) for x in range(n1)]
    origin = [(1, x) for x in range(n1)]
    for y in range(n2):
        if y not in matched:
            points.append(NormalElement((), n1 + y))
            origin.append((2, y))
    dm = distance_matrix(a, points)
    return GluedSpace(WeakPseudometric.from_rows(dm), tuple(origin), a)


def glue_formula(
    m1: WeakPseudometric, m2: WeakPseudometric, ident: Sequence[tuple[int, int]], x: int, y: int
) -> float:
    """Independent cross distance: inf over z in Z of d1(x, z) + d2(z', y)."""
    return min((m1(x, z1) + m2(z2, y) for z1, z2 in ident), default=INF)


# -- one homogenization step -----------------------------------------------------


@dataclass
class HomogenizationResult:
    action: PartialAction
    truncation: Truncation
    distances: list[list[float]]
    gamma_generators: list[int]
    extends: bool
    isometric_extensions: bool
    embedding_isometric: bool
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.extends and self.isometric_extensions and self.embedding_isometric


def _gamma_morphisms(space: Space, gamma: Sequence[Mapping[int, int]]) -> list[Morphism]:
    d = space.metric
    out = []
    for k, g in enumerate(gamma):
        g = {int(x): int(y) for x, y in g.items()}
        if not g:
            raise ValueError(f"gamma[{k}] has empty domain")
        for (x, fx), (y, fy) in product(g.items(), repeat=2):
            if abs(d(fx, fy) - d(x, y)) > TOL * max(1.0, d(x, y)) and d(fx, fy) != d(x, y):
                raise ValueError(f"gamma[{k}] is not isometric on its domain")
        out.append(Morphism.make(f"g{k}", g.keys(), g.values(), g))
    return out


def homogenize_step(
    space: Space,
    gamma: Sequence[Mapping[int, int]] | None,
    n: int = 2,
    names: Sequence[str] | None = None,
    with_inverses: bool = True,
) -> HomogenizationResult:
    """Close gamma into a groupoid of partial isometries, globalize, and
    return Y_n with its distance matrix plus the extension checks."""
    if space.metric is None:
        raise PreconditionError("homogenization needs a metric space")
    rep = validate_pseudometric(space.metric)
    if not rep.valid:
        raise ValueError("; ".join(rep.violations))
    gamma = list(gamma or [])
    base = _gamma_morphisms(space, gamma)
    if names is not None:
        base = [Morphism(nm, m.source, m.target, m.mapping) for nm, m in zip(names, base)]
    mors = close_under_composition(base, with_inverses=with_inverses)
    a = from_category(space, mors)
    trunc = enumerate_truncation(a, n)
    dm = distance_matrix(a, list(trunc))
    index = {el: i for i, el in enumerate(trunc)}
    sig_to_gen = {m.signature: g for g, m in enumerate(mors)}
    gens = []
    for m in base:
        gens.append(sig_to_gen.get(m.signature, -1))
    failures = []
    inner = [el for el in trunc if len(el.word) <= n - 1]
    extends = True
    iso = True
    for k, g in enumerate(gens):
        if g < 0:
            # an identity map of its domain: extends as the identity
            continue
        for x, y in gamma[k].items():
            if act_on_element(a, (g,), embed(int(x))) != embed(int(y)):
                extends = False
                failures.append(("restriction", k, x))
        images = []
        for el in inner:
            img = act_on_element(a, (g,), el)
            if img not in index:
                extends = False
                failures.append(("escapes", k, el))
            images.append(img)
        if not extends:
            continue
        for i, j in product(range(len(inner)), repeat=2):
            if i >= j:
                continue
            before = dm[index[inner[i]]][index[inner[j]]]
            after = dm[index[images[i]]][index[images[j]]]
            if abs(before - after) > TOL * max(1.0, before if before < INF else 1.0) and before != after:
                iso = False
                failures.append(("isometry", k, inner[i], inner[j]))
    d = space.metric
    emb = all(
        abs(dm[index[embed(x)]][index[embed(y)]] - d(x, y)) <= TOL * max(1.0, d(x, y))
        for x, y in product(range(space.size), repeat=2)
    )
    return HomogenizationResult(a, trunc, dm, gens, extends, iso, emb, failures)
