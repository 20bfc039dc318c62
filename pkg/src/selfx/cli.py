"""Command-line client for the knowledge-base service.

Talks HTTP to a running server when SELFX_URL is set; otherwise it spins
the service up in-process, seeding the session from the `--kb` document
if one exists on disk. In-process sessions live only as long as the
process, and inferred facts are never written to disk (dumps carry
asserted facts only), so multi-command workflows that query inferred
state should run against `selfx serve`.

Exit codes: 0 success, 1 for domain "no" answers, 2 for errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

DEFAULT_KB = "selfx.kb.sxdl"


class CliError(Exception):
    pass


def _client():
    url = os.environ.get("SELFX_URL")
    if url:
        return httpx.Client(base_url=url, timeout=60.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # test-client import warns about httpx
        from fastapi.testclient import TestClient

    from .service.app import default_app
    return TestClient(default_app())


def _check(resp) -> dict:
    if resp.status_code >= 400:
        try:
            body = resp.json()
        except ValueError:
            raise CliError(f"HTTP {resp.status_code}: {resp.text}")
        detail = body.get("detail", body)
        extra = ""
        if isinstance(body, dict) and body.get("line"):
            extra = f" (line {body['line']}, column {body['col']})"
        raise CliError(f"{detail}{extra}")
    return resp.json()


def _ensure_session(client, kb_path: str):
    """Seed a missing in-process session from the on-disk KB document."""
    resp = client.get("/kb/stats", params={"kb": kb_path})
    if resp.status_code == 200:
        return
    path = Path(kb_path)
    if path.exists():
        _check(client.post("/kb/load", params={"kb": kb_path},
                           json={"text": path.read_text(encoding="utf-8")}))


def _print_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _read_conditions(args) -> dict:
    return {"conditions_text": Path(args.conditions).read_text(encoding="utf-8")}


def _map_arg(args) -> dict:
    if getattr(args, "map", None):
        return {"map_text": Path(args.map).read_text(encoding="utf-8")}
    return {}


# ----- subcommands ----------------------------------------------------------

def cmd_load(client, args) -> int:
    _ensure_session(client, args.kb)
    text = Path(args.file).read_text(encoding="utf-8")
    body = _check(client.post("/kb/load", params={"kb": args.kb}, json={"text": text}))
    if args.json:
        _print_json(body)
    else:
        print(f"loaded {args.file}: {body['classes_added']} classes, "
              f"{body['instances_added']} instances, {body['links_added']} links")
    dumped = _check(client.get("/kb/dump", params={"kb": args.kb}))
    Path(args.kb).write_text(dumped["text"], encoding="utf-8")
    return 0


def cmd_infer(client, args) -> int:
    _ensure_session(client, args.kb)
    body = _check(client.post("/kb/infer", params={"kb": args.kb},
                              json={"trace": bool(args.trace)}))
    if args.trace:
        lines = [json.dumps(r) for r in body.get("trace") or []]
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    for warning in body["diagnostics"]:
        print(f"warning: {warning}", file=sys.stderr)
    if args.json:
        # wall time is excluded so identical KBs give identical bytes
        _print_json({"rounds": body["rounds"], "retracted": body["retracted"],
                     "facts_added": body["facts_added"]})
    else:
        print(f"fixpoint after {body['rounds']} rounds "
              f"({sum(body['facts_added'].values())} facts added, "
              f"{body['retracted']} retracted)")
        for rule, count in body["facts_added"].items():
            print(f"  {rule}: {count}")
    return 0


def cmd_query(client, args) -> int:
    _ensure_session(client, args.kb)
    params = {"kb": args.kb}
    if args.output:
        params["output"] = args.output
    body = _check(client.get("/kb/processing", params=params))
    if args.json:
        _print_json(body)
        return 0
    rows = body["processings"]
    if not rows:
        print("no processing relations")
        return 0
    for row in rows:
        inputs = ", ".join(row["inputs"]) or "-"
        executors = "+".join(row["executors"])
        print(f"{row['id']}  [{row['rule']}]  {executors}: "
              f"({inputs}) -> {row['output']} : {row['output_class']}")
    return 0


def cmd_explain(client, args) -> int:
    _ensure_session(client, args.kb)
    body = _check(client.get(f"/kb/explain/{args.fact_id}", params={"kb": args.kb}))
    if args.json:
        _print_json(body["tree"])
    else:
        print(body["rendered"])
    return 0


def cmd_validate(client, args) -> int:
    _ensure_session(client, args.kb)
    body = _check(client.get(f"/kb/validate/{args.component}", params={"kb": args.kb}))
    if args.json:
        _print_json(body)
    elif body["ok"]:
        print(f"{body['subject']}: pattern-conformant")
    else:
        print(f"{body['subject']}: {len(body['violations'])} violation(s)")
        for violation in body["violations"]:
            print(f"  [{violation['rule']}] {violation['message']}")
    return 0 if body["ok"] else 1


def cmd_train(client, args) -> int:
    from .assess.experience import ExperienceLogError, read_log
    try:
        records = read_log(args.log)
    except ExperienceLogError as exc:
        raise CliError(str(exc))
    payload = {
        "records": [{"behavior": r.behavior, "features": r.features,
                     "outcome": r.outcome} for r in records],
        "behavior": args.behavior,
        "seed": args.seed, "rows": args.rows, "cols": args.cols,
        "epochs": args.epochs,
    }
    body = _check(client.post("/som/train", json=payload))
    Path(args.out).write_text(body["map_text"], encoding="utf-8")
    print(f"trained map for {body['behavior']!r} on {body['records_used']} records "
          f"({body['nodes']} nodes) -> {args.out}")
    return 0


def cmd_assess(client, args) -> int:
    _ensure_session(client, args.kb)
    payload = {"behavior": args.behavior, **_read_conditions(args), **_map_arg(args)}
    body = _check(client.post("/kb/assess", params={"kb": args.kb}, json=payload))
    if args.json:
        _print_json(body)
        return 0
    _print_assessment(body)
    return 0


def _print_assessment(body):
    print(f"behavior:            {body['behavior']}")
    print(f"feasible:            {'yes' if body['feasible'] else 'no'}")
    if body.get("p_success") is not None:
        print(f"p(success):          {body['p_success']:.3f}")
    if body.get("position_inaccuracy") is not None:
        print(f"position inaccuracy: {body['position_inaccuracy']:.3f} m")
    if body.get("supporting_processing"):
        print(f"supported by:        {', '.join(body['supporting_processing'])}")


def cmd_can(client, args) -> int:
    _ensure_session(client, args.kb)
    payload = {"behavior": args.behavior,
               "min_performance": args.min_performance,
               **_read_conditions(args), **_map_arg(args)}
    body = _check(client.post("/kb/can", params={"kb": args.kb}, json=payload))
    if args.json:
        _print_json(body)
    else:
        print(body["answer"])
        _print_assessment(body["result"])
    return 0 if body["answer"] == "yes" else 1


def cmd_select(client, args) -> int:
    _ensure_session(client, args.kb)
    payload = dict(_read_conditions(args))
    if args.min_performance is not None:
        payload["min_performance"] = args.min_performance
    body = _check(client.post("/kb/select", params={"kb": args.kb}, json=payload))
    if args.json:
        _print_json(body)
        return 0
    if body["behavior"] is None:
        print("no feasible behavior meets the requirement")
        return 1
    print(body["behavior"])
    return 0


def cmd_register_behavior(client, args) -> int:
    _ensure_session(client, args.kb)
    payload = {"name": args.name, "effect_class": args.effect,
               "featured_props": json.loads(args.props) if args.props else {},
               "modality": args.modality}
    _check(client.post("/kb/behaviors", params={"kb": args.kb}, json=payload))
    print(f"registered behavior {args.name!r} (run `selfx infer` before querying)")
    dumped = _check(client.get("/kb/dump", params={"kb": args.kb}))
    Path(args.kb).write_text(dumped["text"], encoding="utf-8")
    return 0


def cmd_bind_map(client, args) -> int:
    _ensure_session(client, args.kb)
    map_text = Path(args.map).read_text(encoding="utf-8")
    _check(client.put(f"/kb/behaviors/{args.behavior}/map",
                      params={"kb": args.kb}, json={"map_text": map_text}))
    print(f"bound map {args.map} to behavior {args.behavior!r}")
    return 0


def cmd_dump(client, args) -> int:
    _ensure_session(client, args.kb)
    body = _check(client.get("/kb/dump", params={"kb": args.kb}))
    sys.stdout.write(body["text"])
    return 0


def cmd_serve(_, args) -> int:
    import uvicorn

    from .service.app import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# ----- argument wiring -------------------------------------------------------

def _add_kb(parser):
    parser.add_argument("--kb", default=os.environ.get("SELFX_KB", DEFAULT_KB),
                        help="KB session path (SELFX_KB overrides the default)")


def _add_json(parser):
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfx", description="capability knowledge base client")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="parse and load an .sxdl document")
    p.add_argument("file")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_load)

    p = sub.add_parser("infer", help="run the rule fixpoint")
    p.add_argument("--trace", help="write the derivation trace to this file")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("query", help="query inferred relations")
    p.add_argument("what", choices=["processing"])
    p.add_argument("--output", help="restrict to outputs of this class")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("explain", help="print a fact's derivation tree")
    p.add_argument("fact_id")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("validate", help="check a component design pattern")
    p.add_argument("component")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("train", help="train a behavior map from an experience log")
    p.add_argument("--behavior", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--cols", type=int, default=4)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("assess", help="predict a behavior's performance")
    p.add_argument("--behavior", required=True)
    p.add_argument("--conditions", required=True, help="environment .sxdl file")
    p.add_argument("--map", help="trained map file")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_assess)

    p = sub.add_parser("can", help="can I do this behavior at this performance?")
    p.add_argument("behavior")
    p.add_argument("--min-performance", type=float, required=True)
    p.add_argument("--conditions", required=True)
    p.add_argument("--map")
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_can)

    p = sub.add_parser("select", help="pick the best feasible behavior")
    p.add_argument("--conditions", required=True)
    p.add_argument("--min-performance", type=float)
    _add_kb(p), _add_json(p)
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("register-behavior", help="register a behavior by name")
    p.add_argument("name")
    p.add_argument("--effect", required=True, help="effect creation class")
    p.add_argument("--modality", choices=["visual", "acoustic"])
    p.add_argument("--props", help="featured props as JSON")
    _add_kb(p)
    p.set_defaults(fn=cmd_register_behavior)

    p = sub.add_parser("bind-map", help="bind a trained map to a behavior")
    p.add_argument("behavior")
    p.add_argument("--map", required=True)
    _add_kb(p)
    p.set_defaults(fn=cmd_bind_map)

    p = sub.add_parser("dump", help="print the asserted facts as a document")
    _add_kb(p)
    p.set_defaults(fn=cmd_dump)

    p = sub.add_parser("serve", help="run the knowledge-base service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8471)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.fn is cmd_serve:
            return cmd_serve(None, args)
        with _client() as client:
            return args.fn(client, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"error: cannot reach the selfx service: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
