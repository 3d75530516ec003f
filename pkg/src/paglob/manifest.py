"""JSON manifests: the on-disk form of presentations, spaces and actions.

Infinite distances are written as the string ``"inf"``.  Every name is
resolved at load time; anything malformed raises :class:`ManifestError`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .fintop import FiniteTopology
from .metglob import WeakPseudometric
from .paction import FiniteMonoid, MonoidPartialAction, PartialAction, Space
from .words import Presentation


class ManifestError(ValueError):
    pass


@dataclass
class Bundle:
    name: str
    presentation: Presentation | None = None
    space: Space | None = None
    action: PartialAction | None = None
    monoid_action: MonoidPartialAction | None = None
    glue: tuple | None = None  # (m1, m2, ident pairs, names1, names2)
    gamma: list[dict[int, int]] | None = None
    raw: dict[str, Any] = field(default_factory=dict, repr=False)


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ManifestError(f"{where}: missing key {key!r}")
    return obj[key]


def _parse_presentation(obj: dict, group: dict | None, max_steps: int | None) -> Presentation:
    gens = _need(obj, "generators", "presentation")
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise ManifestError("presentation.generators must be a list of names")
    rules = []
    for k, r in enumerate(obj.get("rules", [])):
        if not isinstance(r, dict):
            raise ManifestError(f"rule {k} must be an object with lhs and rhs")
        lhs, rhs = _need(r, "lhs", f"rule {k}"), _need(r, "rhs", f"rule {k}")
        if isinstance(lhs, str) or isinstance(rhs, str):
            raise ManifestError(f"rule {k}: sides must be lists of generator names")
        rules.append((lhs, rhs))
    inverses = None if group is None else _need(group, "inverses", "group")
    try:
        return Presentation.build(gens, rules, obj.get("precedence"), inverses, max_steps)
    except (KeyError, ValueError) as exc:
        raise ManifestError(f"presentation: {exc}") from None


def parse_distance(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ManifestError(f"bad distance {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ManifestError(f"bad distance {v!r}")
    return float(v)


def format_distance(v: float):
    return "inf" if v == math.inf else v


def _parse_metric(rows, n: int, where: str) -> WeakPseudometric:
    if not isinstance(rows, list) or len(rows) != n or any(
        not isinstance(r, list) or len(r) != n for r in rows
    ):
        raise ManifestError(f"{where}: metric must be a {n}x{n} matrix")
    return WeakPseudometric(tuple(tuple(parse_distance(v) for v in r) for r in rows))


def _parse_space(obj: dict, where: str = "space") -> Space:
    pts = _need(obj, "points", where)
    if not isinstance(pts, list) or len(set(pts)) != len(pts):
        raise ManifestError(f"{where}: points must be a list of distinct names")
    pts = [str(p) for p in pts]
    n = len(pts)
    metric = _parse_metric(obj["metric"], n, where) if "metric" in obj else None
    topology = None
    if "topology" in obj:
        ids = {p: i for i, p in enumerate(pts)}
        try:
            opens = [[ids[str(p)] for p in s] for s in _need(obj["topology"], "opens", where)]
        except KeyError as exc:
            raise ManifestError(f"{where}: unknown point {exc.args[0]!r} in topology") from None
        topology = FiniteTopology.from_opens(n, opens)
    return Space(tuple(pts), metric, topology)


def _parse_map(space: Space, entry: dict, where: str) -> dict[str, str]:
    mapping = entry.get("map", {})
    if not isinstance(mapping, dict):
        raise ManifestError(f"{where}: map must be an object")
    mapping = {str(k): str(v) for k, v in mapping.items()}
    if "dom" in entry and set(map(str, entry["dom"])) != set(mapping):
        raise ManifestError(f"{where}: dom and map keys disagree")
    for k, v in mapping.items():
        if k not in space.names or v not in space.names:
            raise ManifestError(f"{where}: unknown point in {k!r} -> {v!r}")
    return mapping


def load_manifest(source, max_steps: int | None = None) -> Bundle:
    """Accepts a dict, a path, or a JSON string."""
    if isinstance(source, dict):
        data = source
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ManifestError(f"cannot read manifest: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")
    b = Bundle(str(data.get("name", "")), raw=data)
    if "presentation" in data:
        b.presentation = _parse_presentation(data["presentation"], data.get("group"), max_steps)
    if "space" in data:
        b.space = _parse_space(data["space"])
    if "action" in data:
        if b.presentation is None or b.space is None:
            raise ManifestError("action needs both presentation and space")
        act = data["action"]
        maps = {}
        for g in b.presentation.generators:
            entry = act.get(g, {"dom": [], "map": {}})
            maps[g] = _parse_map(b.space, entry, f"action.{g}")
        extra = set(act) - set(b.presentation.generators)
        if extra:
            raise ManifestError(f"action names unknown generators {sorted(extra)}")
        b.action = PartialAction.build(b.presentation, b.space, maps)
    if "monoid" in data:
        if b.space is None:
            raise ManifestError("monoid action needs a space")
        m = data["monoid"]
        try:
            mon = FiniteMonoid.build(
                _need(m, "elements", "monoid"), _need(m, "table", "monoid"), _need(m, "unit", "monoid")
            )
        except KeyError as exc:
            raise ManifestError(f"monoid: unknown element {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ManifestError(f"monoid: {exc}") from None
        maps = {
            u: _parse_map(b.space, e, f"monoid.element_action.{u}")
            for u, e in m.get("element_action", {}).items()
        }
        unknown = set(maps) - set(mon.names)
        if unknown:
            raise ManifestError(f"monoid.element_action names unknown elements {sorted(unknown)}")
        b.monoid_action = MonoidPartialAction.build(mon, b.space, maps)
    if "glue" in data:
        g = data["glue"]
        s1, s2 = _parse_space(_need(g, "left", "glue"), "glue.left"), _parse_space(
            _need(g, "right", "glue"), "glue.right"
        )
        if s1.metric is None or s2.metric is None:
            raise ManifestError("glue: both spaces need a metric")
        try:
            ident = [(s1.index(str(x)), s2.index(str(y))) for x, y in g.get("ident", [])]
        except ValueError as exc:
            raise ManifestError(f"glue: {exc}") from None
        b.glue = (s1.metric, s2.metric, ident, s1.names, s2.names)
    if "gamma" in data:
        if b.space is None:
            raise ManifestError("gamma needs a space")
        b.gamma = parse_gamma(b.space, data["gamma"])
    return b


def parse_gamma(space: Space, items) -> list[dict[int, int]]:
    if not isinstance(items, list):
        raise ManifestError("gamma must be a list of point maps")
    out = []
    for k, g in enumerate(items):
        if not isinstance(g, dict):
            raise ManifestError(f"gamma[{k}] must be an object")
        try:
            out.append({space.index(str(x)): space.index(str(y)) for x, y in g.items()})
        except ValueError as exc:
            raise ManifestError(f"gamma[{k}]: {exc}") from None
    return out


def action_to_manifest(a: PartialAction, name: str = "") -> dict:
    """Inverse of :func:`load_manifest` for a plain partial action."""
    p, sp = a.presentation, a.space
    out: dict[str, Any] = {"name": name} if name else {}
    out["presentation"] = {
        "generators": list(p.generators),
        "precedence": [p.generators[g] for g in p.precedence],
        "rules": [{"lhs": p.names(r.lhs), "rhs": p.names(r.rhs)} for r in p.rules],
    }
    if p.inverses is not None:
        out["group"] = {"inverses": {p.generators[g]: p.generators[h] for g, h in enumerate(p.inverses) if g <= h}}
    space: dict[str, Any] = {"points": list(sp.names)}
    if sp.metric is not None:
        space["metric"] = [[format_distance(v) for v in row] for row in sp.metric.dist]
    out["space"] = space
    out["action"] = {
        p.generators[g]: {
            "dom": [sp.names[x] for x, y in enumerate(f) if y is not None],
            "map": {sp.names[x]: sp.names[y] for x, y in enumerate(f) if y is not None},
        }
        for g, f in enumerate(a.maps)
    }
    return out


def fixture_names() -> list[str]:
    root = resources.files("paglob") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("paglob") / "fixtures" / f"{name}.json"))


def load_fixture(name: str) -> Bundle:
    return load_manifest(fixture_path(name))
