"""Command-line front end: ``paglob <command> MANIFEST [options]``.

Exit codes: 0 computed / check passed, 1 check failed, 2 input error,
3 precondition violated (for example a distance on a non-confluent action).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any

from .common import PreconditionError
from .fintop import (
    check_embedding,
    check_T1,
    globalization_topology,
    is_continuous_action,
    validate_topology,
)
from .glob import enumerate_truncation, finite_monoid_globalization
from .manifest import Bundle, ManifestError, format_distance, load_manifest, parse_gamma
from .metglob import (
    BruteForceOracle,
    cap_infinite,
    check_nonexpansive,
    distance,
    distance_group_formula,
    distance_matrix,
    geodesic,
    glue,
    homogenize_step,
    validate_pseudometric,
)
from .paction import (
    Config,
    NormalElement,
    PartialAction,
    normalize_config,
    trivial_presentation_action,
    triple_condition_check,
)
from .words import Presentation

TOL = 1e-9


class InputError(ValueError):
    pass


def tokenize_word(p: Presentation, text: str) -> tuple[int, ...]:
    """Split ``text`` into generator names: whitespace first, then longest match."""
    out = []
    for chunk in text.split():
        if chunk in ("e", "()") and "e" not in p.generators:
            continue
        i = 0
        while i < len(chunk):
            best = max((g for g in p.generators if chunk.startswith(g, i)), key=len, default=None)
            if best is None:
                raise InputError(f"cannot read {chunk[i:]!r} as generators")
            out.append(p.generators.index(best))
            i += len(best)
    return tuple(out)


def parse_element(a: PartialAction, text: str) -> NormalElement:
    """``"word @ point"`` or a bare point name; returned in normal form."""
    word_text, _, point_text = text.rpartition("@")
    point_text = point_text.strip()
    try:
        x = a.space.index(point_text)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return normalize_config(a, Config(tokenize_word(a.presentation, word_text), x))


def show_element(a: PartialAction, el) -> str:
    return a.show(el)


def _dist(v: float, cap: float | None = None):
    return format_distance(cap_infinite(v, cap))


def _need_action(b: Bundle) -> PartialAction:
    if b.action is None:
        raise InputError("manifest has no partial action")
    return b.action


# -- commands --------------------------------------------------------------------


def cmd_validate(b: Bundle, args) -> tuple[str, dict]:
    payload: dict[str, Any] = {}
    ok = True
    if b.presentation is not None:
        rep = b.presentation.validation
        payload["presentation"] = {"valid": rep.valid, "violations": rep.violations}
        ok &= rep.valid
    if b.space is not None and b.space.metric is not None:
        rep = validate_pseudometric(b.space.metric)
        payload["metric"] = {"valid": rep.valid, "violations": rep.violations, **rep.flags}
        ok &= rep.valid
    if b.space is not None and b.space.topology is not None:
        rep = validate_topology(b.space.topology)
        payload["topology"] = {"valid": rep.valid, "violations": rep.violations, **rep.flags}
        ok &= rep.valid
    if b.action is not None and ok:
        if b.space.metric is not None:
            ne = check_nonexpansive(b.action)
            payload["nonexpansive"] = ne
            ok &= ne
        if b.space.topology is not None:
            c = is_continuous_action(b.action)
            payload["continuous"] = c
            ok &= c
    if b.monoid_action is not None:
        try:
            b.monoid_action.validate()
            payload["monoid_action"] = {"valid": True}
        except ValueError as exc:
            payload["monoid_action"] = {"valid": False, "violations": [str(exc)]}
            ok = False
        if ok and b.space.topology is not None:
            c = is_continuous_action(b.monoid_action)
            payload["continuous"] = c
            ok &= c
    if b.glue is not None:
        for side, m in zip(("left", "right"), b.glue[:2]):
            rep = validate_pseudometric(m)
            payload[f"glue_{side}"] = {"valid": rep.valid, "violations": rep.violations}
            ok &= rep.valid
    return ("valid" if ok else "invalid"), payload


def _counterexamples(a: PartialAction | None, p: Presentation, report) -> list:
    out = []
    for c in report.counterexamples:
        if a is not None and isinstance(c.peak, tuple) and len(c.peak) == 2 and isinstance(c.peak[0], tuple):
            fmt = a.show
        else:
            fmt = p.show
        out.append({k: fmt(getattr(c, k)) for k in ("peak", "reduct1", "reduct2", "nf1", "nf2")})
    return out


def cmd_confluence(b: Bundle, args) -> tuple[str, dict]:
    payload: dict[str, Any] = {}
    ok = True
    if b.presentation is not None:
        p = b.presentation
        p.require_terminating()
        wr = p.confluence
        payload["words"] = {"status": wr.status, "counterexamples": _counterexamples(None, p, wr)}
        ok &= wr.confluent
        if b.action is not None:
            ar = b.action.confluence
            payload["action"] = {
                "status": ar.status,
                "counterexamples": _counterexamples(b.action, p, ar),
            }
            ok &= ar.confluent
    if b.monoid_action is not None:
        ma = b.monoid_action
        ma.validate()
        pa = trivial_presentation_action(ma)
        ar = pa.confluence
        q = finite_monoid_globalization(ma)
        payload["monoid_action"] = {
            "status": ar.status,
            "counterexamples": _counterexamples(pa, pa.presentation, ar),
            "classes": [[f"({u},{x})" for u, x in q.members(c)] for c in range(q.size)],
            "triple_violations": [list(t) for t in triple_condition_check(ma)],
        }
        ok &= ar.confluent
    if not payload:
        raise InputError("nothing to check: manifest has no presentation or monoid")
    return ("Confluent" if ok else "NotConfluent"), payload


def cmd_distance(b: Bundle, args) -> tuple[str, dict]:
    a = _need_action(b)
    a.require_confluent()
    e1, e2 = parse_element(a, args.el1), parse_element(a, args.el2)
    d = distance(a, e1, e2)
    cap = args.cap_infinite_at
    payload: dict[str, Any] = {
        "from": show_element(a, e1),
        "to": show_element(a, e2),
        "distance": _dist(d, cap),
    }
    ok = True
    if args.oracle:
        depth = args.depth if args.depth is not None else max(len(e1.word), len(e2.word)) + 2
        segs = args.max_segments if args.max_segments is not None else 2 * (len(e1.word) + len(e2.word) + 1)
        o = BruteForceOracle(a, depth).distance(e1, e2, segs)
        payload["oracle"] = {"distance": _dist(o, cap), "depth": depth, "max_segments": segs}
        ok &= _close(o, d)
    if args.group_formula:
        g = distance_group_formula(a, e1.word, e2.word, e1.point, e2.point)
        payload["group_formula"] = _dist(g, cap)
        ok &= _close(g, d)
    if args.geodesic:
        w = geodesic(a, e1, e2)
        p = a.presentation
        payload["geodesic"] = None if w is None else {
            "form": w.form,
            "pattern": w.pattern,
            "total": _dist(w.total),
            "segments": [
                {"word": p.show(s[0]), "from": a.space.names[s[1]], "to": a.space.names[s[2]]}
                for s in w.segments
            ],
        }
    return ("computed" if ok else "mismatch"), payload


def _close(u: float, v: float) -> bool:
    return u == v or abs(u - v) <= TOL * max(1.0, abs(v))


def cmd_truncation(b: Bundle, args) -> tuple[str, dict]:
    a = _need_action(b)
    t = enumerate_truncation(a, args.n)
    payload: dict[str, Any] = {
        "n": args.n,
        "size": len(t),
        "elements": [{"element": a.show(el), "length": len(el.word)} for el in t],
    }
    if args.distances:
        dm = distance_matrix(a, list(t))
        payload["distances"] = [[_dist(v, args.cap_infinite_at) for v in row] for row in dm]
    return "computed", payload


def cmd_topology(b: Bundle, args) -> tuple[str, dict]:
    ma = b.monoid_action
    if ma is None or ma.space.topology is None:
        raise InputError("topology checks need a monoid action on a space with a topology")
    ma.validate()
    t = ma.space.topology
    q = finite_monoid_globalization(ma)
    ty = globalization_topology(q, t, args.mode)
    ax = validate_topology(ty)
    payload: dict[str, Any] = {
        "classes": [q.label(c) for c in range(q.size)],
        "open_sets": len(ty.opens),
        "axioms": ax.valid,
    }
    ok = ax.valid
    run_all = not (args.embedding or args.t1)
    if args.embedding or run_all:
        er = check_embedding(q, t)
        payload["embedding"] = {
            "passed": er.passed,
            "witness": None if er.witness is None else [ma.space.names[x] for x in er.witness],
        }
        ok &= er.passed
    if args.t1 or run_all:
        tr = check_T1(q, t)
        payload["T1"] = {
            "Y_is_T1": tr.y_is_T1,
            "preimage_criterion": tr.preimage_criterion,
            "agree": tr.agree,
            "X_is_T1": tr.x_is_T1,
        }
        ok &= tr.agree
    return ("pass" if ok else "fail"), payload


def cmd_glue(b: Bundle, args) -> tuple[str, dict]:
    if b.glue is None:
        raise InputError("manifest has no glue section")
    m1, m2, ident, n1, n2 = b.glue
    g = glue(m1, m2, ident)
    names = [n1[x] if side == 1 else n2[x] for side, x in g.origin]
    return "computed", {
        "points": names,
        "origin": [["left" if s == 1 else "right", (n1 if s == 1 else n2)[x]] for s, x in g.origin],
        "distances": [[_dist(v, args.cap_infinite_at) for v in row] for row in g.metric.dist],
    }


def cmd_homogenize(b: Bundle, args) -> tuple[str, dict]:
    sp = b.space
    if sp is None or sp.metric is None:
        raise InputError("homogenization needs a metric space")
    names = None
    if args.gamma == "singletons":
        pairs = [(x, y) for x in range(sp.size) for y in range(sp.size) if x != y]
        gamma = [{y: x} for x, y in pairs]
        short = all(len(s) == 1 for s in sp.names)
        names = [f"({sp.names[x]}{sp.names[y]})" if short else f"({sp.names[x]},{sp.names[y]})" for x, y in pairs]
    elif args.gamma == "manifest":
        if b.gamma is None:
            raise InputError("manifest has no gamma section")
        gamma = b.gamma
    else:
        try:
            with open(args.gamma) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read gamma file: {exc}") from None
        gamma = parse_gamma(sp, data.get("gamma", data) if isinstance(data, dict) else data)
    try:
        r = homogenize_step(sp, gamma, args.n, names=names)
    except ValueError as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise InputError(str(exc)) from None
    a = r.action
    payload = {
        "n": args.n,
        "generators": list(a.presentation.generators),
        "size": len(r.truncation),
        "elements": [a.show(el) for el in r.truncation],
        "extends": r.extends,
        "isometric_extensions": r.isometric_extensions,
        "embedding_isometric": r.embedding_isometric,
    }
    if args.distances:
        payload["distances"] = [[_dist(v) for v in row] for row in r.distances]
    return ("pass" if r.passed else "fail"), payload


COMMANDS = {
    "validate": cmd_validate,
    "confluence": cmd_confluence,
    "distance": cmd_distance,
    "truncation": cmd_truncation,
    "topology": cmd_topology,
    "glue": cmd_glue,
    "homogenize": cmd_homogenize,
}

EXIT = {
    "valid": 0, "Confluent": 0, "computed": 0, "pass": 0,
    "invalid": 1, "NotConfluent": 1, "mismatch": 1, "fail": 1,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("manifest", help="JSON manifest file, or - for stdin")
    common.add_argument("--pretty", action="store_true", help="indented text instead of JSON")
    common.add_argument("--timing", action="store_true", help="include wall-clock seconds")
    common.add_argument("--force-max-steps", type=int, metavar="N",
                        help="normalize uncertified presentations under a step budget")
    common.add_argument("--cap-infinite-at", type=float, metavar="C",
                        help="report infinite distances as C")

    ap = argparse.ArgumentParser(prog="paglob", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common])
    sub.add_parser("confluence", parents=[common])
    d = sub.add_parser("distance", parents=[common])
    d.add_argument("el1", help='element as "word @ point" or a point name')
    d.add_argument("el2")
    d.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    d.add_argument("--depth", type=int, help="word length bound for --oracle")
    d.add_argument("--max-segments", type=int, help="segment bound for --oracle")
    d.add_argument("--group-formula", action="store_true")
    d.add_argument("--geodesic", action="store_true")
    t = sub.add_parser("truncation", parents=[common])
    t.add_argument("-n", type=int, default=1)
    t.add_argument("--distances", action="store_true")
    tp = sub.add_parser("topology", parents=[common])
    tp.add_argument("--embedding", action="store_true")
    tp.add_argument("--t1", action="store_true")
    tp.add_argument("--mode", choices=["auto", "filter", "preorder"], default="auto")
    sub.add_parser("glue", parents=[common])
    h = sub.add_parser("homogenize", parents=[common])
    h.add_argument("-n", type=int, default=2)
    h.add_argument("--gamma", default="singletons",
                   help='"singletons", "manifest", or a JSON file with a list of point maps')
    h.add_argument("--distances", action="store_true")
    return ap


def _pretty(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
    elif isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            lines.append(pad + " ".join(str(v) for v in obj))
        else:
            for v in obj:
                if isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v):
                    lines.append(pad + " ".join(str(x) for x in v))
                else:
                    lines.append(f"{pad}-")
                    lines.extend(_pretty(v, indent + 1))
    else:
        lines.append(pad + json.dumps(obj, ensure_ascii=False))
    return lines


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report: dict[str, Any] = {"command": args.command, "manifest": args.manifest}
    try:
        src = sys.stdin.read() if args.manifest == "-" else args.manifest
        b = load_manifest(src, max_steps=args.force_max_steps)
        status, payload = COMMANDS[args.command](b, args)
        code = EXIT[status]
    except (ManifestError, InputError) as exc:
        status, payload, code = "input-error", {"error": str(exc)}, 2
    except PreconditionError as exc:
        status, payload, code = "precondition-violated", {"error": str(exc)}, 3
    except RuntimeError as exc:  # step budget exhausted
        status, payload, code = "precondition-violated", {"error": str(exc)}, 3
    report["status"] = status
    report["payload"] = payload
    if args.timing:
        report["timing"] = round(time.perf_counter() - start, 6)
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    args_pretty = "--pretty" in (argv if argv is not None else sys.argv[1:])
    if args_pretty:
        print("\n".join(_pretty(report)))
    else:
        print(json.dumps(report, indent=2, ensure_ascii=False))
    return code


if __name__ == "__main__":
    sys.exit(main())
