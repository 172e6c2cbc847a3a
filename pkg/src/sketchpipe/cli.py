"""Command-line entry point.

Every subcommand is a thin client over the HTTP service; by default the app
runs in-process, with ``--server URL`` the same requests go over the network.
Data goes to stdout or files, diagnostics to stderr.  Exit codes: 0 success,
1 structured error, 2 usage error.
"""

from __future__ import annotations

import argparse
import base64
import json
import re
import sys
from pathlib import Path

from sketchpipe import __version__
from sketchpipe.client import ServiceClient, ServiceError
from sketchpipe.errors import IoError, SketchPipeError

_ARTICLES = ("a", "an", "the")

_RELATION_SPLITS = (
    ("left", re.compile(r"\s+(?:to\s+the\s+)?left\s+of\s+", re.IGNORECASE)),
    ("right", re.compile(r"\s+(?:to\s+the\s+)?right\s+of\s+", re.IGNORECASE)),
    ("above", re.compile(r"\s+above\s+", re.IGNORECASE)),
    ("below", re.compile(r"\s+below\s+", re.IGNORECASE)),
)


def _strip_article(phrase: str) -> str:
    words = phrase.strip().split()
    if len(words) > 1 and words[0].lower() in _ARTICLES:
        words = words[1:]
    return " ".join(words)


def parse_spec_string(text: str) -> dict:
    """Turn "tv above surfboard" (articles optional) into a prompt spec."""
    for relation, pattern in _RELATION_SPLITS:
        parts = pattern.split(text, maxsplit=1)
        if len(parts) == 2:
            a, b = (_strip_article(p) for p in parts)
            if not a or not b:
                raise argparse.ArgumentTypeError(
                    f"spec {text!r} needs an object on each side of the relation"
                )
            return {"objects": [{"name": a}, {"name": b}], "relation": relation}
    raise argparse.ArgumentTypeError(
        f"spec {text!r} contains no relation (left/right/above/below)"
    )


def parse_place(text: str) -> tuple[str, tuple[float, float], tuple[float, float]]:
    """Parse NAME=CX,CY,W,H into (name, center, size), all in cm."""
    name, sep, rest = text.partition("=")
    parts = rest.split(",") if sep else []
    if not name.strip() or len(parts) != 4:
        raise argparse.ArgumentTypeError(f"--place wants NAME=CX,CY,W,H, got {text!r}")
    try:
        cx, cy, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--place {text!r}: {exc}") from None
    return name.strip(), (cx, cy), (w, h)


def _apply_places(spec: dict, places) -> dict:
    for name, center, size in places or []:
        for obj in spec["objects"]:
            if obj["name"] == name:
                obj["center"] = list(center)
                obj["size"] = list(size)
                break
        else:
            known = ", ".join(o["name"] for o in spec["objects"])
            raise SketchPipeError(f"--place names unknown object {name!r} (objects: {known})")
    return spec


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _transport_payload(args) -> dict:
    if args.replay:
        return {"mode": "replay", "fixtures_dir": args.replay}
    if args.record:
        payload = {"mode": "record", "fixtures_dir": args.record}
    else:
        payload = {"mode": "live"}
    for key in ("base_url", "model", "api_key"):
        value = getattr(args, key.replace("-", "_"), None)
        if value:
            payload[key] = value
    return payload


def _add_transport_flags(sub: argparse.ArgumentParser) -> None:
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--replay", metavar="DIR", help="answer from recorded fixtures in DIR")
    mode.add_argument("--record", metavar="DIR", help="ask the live endpoint and record fixtures into DIR")
    mode.add_argument("--live", action="store_true", help="ask the live endpoint (default)")
    sub.add_argument("--base-url", help="LLM endpoint base URL (default: environment)")
    sub.add_argument("--model", help="LLM model name (default: environment)")
    sub.add_argument("--api-key", help="LLM API key (default: environment)")


def _spec_slug(spec: dict) -> str:
    bits = [o["name"] for o in spec["objects"]]
    if spec.get("relation"):
        bits.insert(1, spec["relation"])
    return re.sub(r"[^a-z0-9]+", "-", " ".join(bits).lower()).strip("-")


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# -- subcommand handlers -------------------------------------------------


def cmd_parse(client: ServiceClient, args) -> int:
    resp = client.parse(_read_source(args.file))
    if args.json:
        _print_json(resp)
        return 0
    program = resp["program"]
    x0, y0, x1, y1 = program["bounding_box"]
    print(f"parsed {resp['command_count']} command(s); bounding box ({x0:g}, {y0:g}) to ({x1:g}, {y1:g})")
    for i, cmd in enumerate(program["commands"], start=1):
        extra = f" r={cmd['radius']:g}" if cmd["radius"] is not None else ""
        print(f"  {i}. {cmd['kind']} {len(cmd['points'])} point(s){extra}")
    for warning in program["warnings"]:
        print(f"warning: line {warning['line']}: {warning['message']}", file=sys.stderr)
    return 0


def cmd_rasterize(client: ServiceClient, args) -> int:
    source = _read_source(args.file)
    resp = client.rasterize(source=source, scale=args.scale)
    out = args.out
    if out is None:
        stem = "sketch" if args.file == "-" else Path(args.file).stem
        out = f"{stem}.pgm"
    try:
        Path(out).write_bytes(base64.b64decode(resp["pgm_base64"]))
    except OSError as exc:
        raise IoError(f"cannot write {out}: {exc}") from exc
    for warning in resp["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    if args.json:
        _print_json({k: resp[k] for k in ("width", "height", "ink_area")} | {"out": out})
    else:
        print(f"{out}: {resp['width']}x{resp['height']}, {resp['ink_area']} ink px")
    return 0


def cmd_prompt(client: ServiceClient, args) -> int:
    spec = _apply_places(args.spec, args.place)
    resp = client.prompt(spec)
    if args.json:
        _print_json(resp)
    else:
        print(resp["prompt"])
    return 0


def cmd_query(client: ServiceClient, args) -> int:
    spec = _apply_places(args.spec, args.place)
    resp = client.query(spec, _transport_payload(args))
    if args.out:
        try:
            Path(args.out).write_text(
                json.dumps(resp, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise IoError(f"cannot write {args.out}: {exc}") from exc
    if args.json:
        _print_json(resp)
    else:
        print(f"status: {resp['status']}")
        if resp.get("error"):
            print(f"error: {resp['error']}", file=sys.stderr)
        for entry in resp.get("summary") or []:
            x, y = entry["position"]
            print(f"  {entry['name']} at ({x:g}, {y:g})")
    return 0


def cmd_ground(client: ServiceClient, args) -> int:
    source = _read_source(args.file)
    try:
        groundings = json.loads(Path(args.groundings).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {args.groundings}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SketchPipeError(f"{args.groundings} is not valid JSON: {exc}") from exc
    resp = client.ground(groundings, source=source, scale=args.scale)
    if args.out:
        try:
            Path(args.out).write_text(
                json.dumps(resp, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise IoError(f"cannot write {args.out}: {exc}") from exc
    if args.json:
        _print_json(resp)
    else:
        print(f"{len(resp['components'])} component(s)")
        for m in resp["matches"]:
            if m["component_id"] is None:
                print(f"  {m['name']}: unmatched")
            else:
                print(f"  {m['name']} -> component {m['component_id']} ({m['distance_px']:.1f} px)")
    return 0


def cmd_build_dataset(client: ServiceClient, args) -> int:
    resp = client.build_dataset(
        captions_path=args.captions,
        instances_path=args.instances,
        out_dir=args.out,
        limit=args.limit,
        all_captions=args.all_captions,
        outline=args.outline,
        jobs=args.jobs,
    )
    if args.json:
        _print_json(resp)
    else:
        print(
            f"wrote {resp['rows_written']} row(s) to {resp['manifest_path']} "
            f"({resp['images_failed']} failed)"
        )
    return 0


def cmd_evaluate(client: ServiceClient, args) -> int:
    resp = client.evaluate(
        detections_path=args.detections,
        ground_truth_path=args.ground_truth,
        eps_frac=args.eps,
        samples_per_prompt=args.samples,
        score_threshold=args.threshold,
        euclidean=args.euclidean,
        jobs=args.jobs,
        out_path=args.out,
        fmt=args.format,
    )
    if args.json:
        _print_json(resp)
    elif args.out:
        print(f"report written to {resp['out_path']}")
    else:
        print(resp["text" if args.format == "text" else "csv"], end="")
    return 0


def cmd_pipeline(client: ServiceClient, args) -> int:
    spec = _apply_places(args.spec, args.place)
    out_dir = args.out_dir or str(Path("runs") / _spec_slug(spec))
    resp = client.pipeline(spec, out_dir, _transport_payload(args), scale=args.scale)
    if args.json:
        _print_json(resp)
        return 0
    print(f"status: {resp['status']}")
    print(f"run dir: {resp['run_dir']}")
    for name in resp["files"]:
        print(f"  {name}")
    for m in resp["matches"]:
        if m["component_id"] is None:
            print(f"match: {m['name']} unmatched", file=sys.stderr)
        else:
            print(f"match: {m['name']} -> component {m['component_id']} ({m['distance_px']:.1f} px)")
    if resp.get("error"):
        print(f"error: {resp['error']}", file=sys.stderr)
    return 0


# -- parser wiring -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchpipe",
        description="Sketch-program toolchain: parse and rasterize TikZ-style sketches, "
        "query an LLM for them, build polygon-sketch datasets, and score detections.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", metavar="URL", help="talk to a running service instead of in-process")
    common.add_argument("--json-errors", action="store_true", help="print errors as JSON on stderr")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a sketch file and show its structure")
    p.add_argument("file", help="sketch source file, or - for stdin")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("rasterize", parents=[common], help="render a sketch file to a PGM bitmap")
    p.add_argument("file", help="sketch source file, or - for stdin")
    p.add_argument("--out", help="output PGM path (default: input stem + .pgm)")
    p.add_argument("--scale", type=float, default=100.0, help="pixels per cm (default 100)")
    p.set_defaults(func=cmd_rasterize)

    p = sub.add_parser("prompt", parents=[common], help="render the prompt for an object-relation spec")
    p.add_argument("spec", type=parse_spec_string, help='e.g. "tv above surfboard"')
    p.add_argument("--place", type=parse_place, action="append", metavar="NAME=CX,CY,W,H",
                   help="pin an object's center and size in cm (repeatable)")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("query", parents=[common], help="send a prompt to the LLM and extract the sketch")
    p.add_argument("spec", type=parse_spec_string, help='e.g. "tv above surfboard"')
    p.add_argument("--place", type=parse_place, action="append", metavar="NAME=CX,CY,W,H")
    p.add_argument("--out", help="save the full response JSON here")
    _add_transport_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("ground", parents=[common], help="match named groundings to sketch components")
    p.add_argument("file", help="sketch source file, or - for stdin")
    p.add_argument("--groundings", required=True, help="groundings JSON file")
    p.add_argument("--scale", type=float, default=100.0)
    p.add_argument("--out", help="save components and matches JSON here")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("build-dataset", parents=[common], help="build sketch/caption/grounding triplets")
    p.add_argument("--captions", required=True, help="caption annotation JSON")
    p.add_argument("--instances", required=True, help="instance annotation JSON")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--limit", type=int, help="stop after N images")
    p.add_argument("--all-captions", action="store_true", help="one row per caption instead of the first")
    p.add_argument("--outline", action="store_true", help="draw polygon outlines instead of fills")
    p.add_argument("--jobs", type=int, default=1, help="render in N threads (same output for any N)")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("evaluate", parents=[common], help="score detection records against ground truth")
    p.add_argument("--detections", required=True, help="detections JSONL")
    p.add_argument("--ground-truth", required=True, help="ground-truth JSONL")
    p.add_argument("--eps", type=float, default=0.039, help="tolerance as a fraction of the canvas")
    p.add_argument("--samples", type=int, default=4, help="images per prompt")
    p.add_argument("--threshold", type=float, default=0.1, help="detection score threshold")
    p.add_argument("--euclidean", action="store_true", help="use Euclidean position tolerance")
    p.add_argument("--jobs", type=int, default=1, help="score prompts in N threads")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", parents=[common],
                       help="prompt, query, parse, rasterize and ground in one run directory")
    p.add_argument("--spec", required=True, type=parse_spec_string, help='e.g. "tv above surfboard"')
    p.add_argument("--place", type=parse_place, action="append", metavar="NAME=CX,CY,W,H")
    p.add_argument("--out-dir", help="run directory (default: runs/<spec slug>)")
    p.add_argument("--scale", type=float, default=100.0)
    _add_transport_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def _report_error(exc: SketchPipeError, json_errors: bool) -> None:
    if json_errors:
        print(json.dumps({"error": exc.to_dict()}, sort_keys=True), file=sys.stderr)
    else:
        print(f"sketchpipe: {exc}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(server=args.server)
    try:
        return args.func(client, args)
    except (ServiceError, SketchPipeError) as exc:
        _report_error(exc, args.json_errors)
        return 1


if __name__ == "__main__":
    sys.exit(main())
