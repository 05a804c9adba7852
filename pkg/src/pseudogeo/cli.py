"""Command-line client for the engine.

Every subcommand talks HTTP to the service layer: against ``--server URL``
when given, otherwise against the app mounted in-process, so local runs and
remote runs produce identical artifacts.  Metric sources of the form
``@file`` are read here and sent as text, keeping the service free of
filesystem access.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 failed
assertions in ``check``.  ``PSEUDOGEO_TOL`` overrides the default
tolerances (classification tolerance and integrator relative tolerance)
wherever no explicit flag is given.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import httpx

from .portrait import write_bundle

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_CHECK = 3


class UsageError(Exception):
    """Bad flags or inputs; exits with code 1."""


class EngineFailure(Exception):
    """The engine could not produce a result; exits with code 2."""


# --- transport ----------------------------------------------------------------


class InProcessTransport(httpx.BaseTransport):
    """Serve requests from the ASGI app on a private event loop."""

    def __init__(self) -> None:
        from .service import create_app

        self._asgi = httpx.ASGITransport(app=create_app())

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        status, headers, content = asyncio.run(self._roundtrip(request))
        return httpx.Response(status, headers=headers, content=content, request=request)

    async def _roundtrip(self, request: httpx.Request):
        response = await self._asgi.handle_async_request(request)
        content = await response.aread()
        await response.aclose()
        return response.status_code, response.headers, content


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    return httpx.Client(
        transport=InProcessTransport(), base_url="http://pseudogeo.internal"
    )


def call(client: httpx.Client, method: str, path: str, **kwargs: object) -> dict:
    try:
        response = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        raise EngineFailure(f"request failed: {exc}") from exc
    if response.status_code == 400:
        raise UsageError(_detail(response))
    if response.status_code != 200:
        raise EngineFailure(_detail(response))
    return response.json()


def _detail(response: httpx.Response) -> str:
    try:
        return str(response.json().get("detail", response.text))
    except ValueError:
        return response.text or f"HTTP {response.status_code}"


# --- flag parsing helpers -------------------------------------------------------


class Parser(argparse.ArgumentParser):
    """argparse with the package's exit-code contract (usage errors exit 1)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad {what} {text!r}: {exc}") from exc


def env_tolerance() -> float | None:
    raw = os.environ.get("PSEUDOGEO_TOL")
    if raw is None or raw == "":
        return None
    try:
        value = float(raw)
    except ValueError as exc:
        raise UsageError(f"PSEUDOGEO_TOL must be a number, got {raw!r}") from exc
    if value <= 0.0:
        raise UsageError("PSEUDOGEO_TOL must be positive")
    return value


def metric_source(args: argparse.Namespace) -> str:
    source = args.metric
    if source is None:
        raise UsageError("this command needs --metric")
    source = source.strip()
    if source.startswith("@"):
        path = Path(source[1:]).expanduser()
        if not path.exists():
            raise UsageError(f"metric file not found: {path}")
        return path.read_text()
    for flag in ("eps", "y1"):
        value = getattr(args, flag, None)
        if value is None:
            continue
        expected = {"eps": "catalog:dd", "y1": "catalog:c1c3"}[flag]
        if source != expected:
            raise UsageError(f"--{flag} only applies to --metric {expected}")
        source = f"{source}({value})"
    return source


def _integrator_params(tol: float | None) -> dict | None:
    if tol is None:
        return None
    return {"rel_tol": tol, "abs_tol": tol * 1e-2}


# --- subcommand handlers ---------------------------------------------------------


def cmd_catalog(client: httpx.Client, args: argparse.Namespace) -> int:
    if args.name:
        params = {} if args.value is None else {"value": args.value}
        detail = call(client, "GET", f"/catalog/{args.name}", params=params)
        if args.json:
            print(json.dumps(detail, indent=2))
            return EXIT_OK
        print(f"{detail['name']}: {detail['summary']}")
        metric = detail["metric"]
        for key in ("a", "b", "c"):
            print(f"  {key} = {metric[key]}")
        print(f"  bbox = {metric['bbox']}")
        if detail.get("parameter"):
            print(f"  parameter: {detail['parameter']} (default {detail['default']:g})")
        if "embedding" in detail:
            emb = detail["embedding"]
            names = ("X", "Y", "Z")
            parts = ", ".join(f"{n} = {c}" for n, c in zip(names, emb["components"]))
            print(f"  embedding ({emb['signature']}): {parts}")
        return EXIT_OK
    listing = call(client, "GET", "/catalog")
    if args.json:
        print(json.dumps(listing, indent=2))
        return EXIT_OK
    for entry in listing["entries"]:
        display = entry["name"]
        if entry.get("parameter"):
            display = f"{display}({entry['parameter']}={entry['default']:g})"
        print(f"{display:<18} {entry['summary']}")
    return EXIT_OK


def _direction_text(root: dict) -> str:
    slope = root.get("slope")
    body = "vertical" if slope is None else f"dy/dx = {slope:g}"
    notes = []
    if root.get("isotropic"):
        notes.append("isotropic")
    if root.get("multiplicity", 1) != 1:
        notes.append(f"multiplicity {root['multiplicity']}")
    return body + (f"  ({', '.join(notes)})" if notes else "")


def _print_report(report: dict) -> None:
    x, y = report["point"]
    gx, gy = report["grad_delta"]
    print(f"case: {report['case']}")
    print(f"point: ({x:g}, {y:g})")
    print(f"grad discriminant: ({gx:g}, {gy:g})")
    print(f"isotropic direction: {_direction_text(_root_like(report['isotropic']))}")
    print("admissible directions:")
    for root in report["roots"]:
        print(f"  {_direction_text(root)}")
    spectrum = report.get("isotropic_spectrum") or []
    if spectrum:
        parts = []
        for re_part, im_part in spectrum:
            parts.append(f"{re_part:g}{im_part:+g}i" if im_part else f"{re_part:g}")
        print(f"lifted spectrum: {', '.join(parts)}")
    for message in report.get("warnings", []):
        print(f"warning: {message}")


def _root_like(direction: dict) -> dict:
    if direction["chart"] == "p":
        return {"slope": direction["value"]}
    value = direction["value"]
    return {"slope": None if value == 0.0 else 1.0 / value}


def cmd_classify(client: httpx.Client, args: argparse.Namespace) -> int:
    tol = args.tol if args.tol is not None else (env_tolerance() or 1e-9)
    payload: dict[str, object] = {"metric": metric_source(args), "tol": tol}
    if args.scan:
        payload["scan"] = True
        if args.step is not None:
            payload["scan_step"] = args.step
    elif args.point is not None:
        payload["point"] = _floats(args.point, 2, "--point")
    else:
        raise UsageError("classify needs --point x,y or --scan")
    result = call(client, "POST", "/classify", json=payload)
    if args.json:
        print(json.dumps(result, indent=2))
        return EXIT_OK
    if args.scan:
        for seg in result["segments"]:
            x0, y0 = seg["start"]
            x1, y1 = seg["end"]
            print(
                f"component {seg['component']}  arc [{seg['arc_from']:.4g}, "
                f"{seg['arc_to']:.4g}]  {seg['case']}  "
                f"({x0:.4g}, {y0:.4g}) .. ({x1:.4g}, {y1:.4g})"
            )
        for tr in result.get("transitions", []):
            x, y = tr["point"]
            middle = f" through {tr['boundary_case']}" if tr["boundary_case"] else ""
            print(
                f"transition at ({x:.4g}, {y:.4g}): "
                f"{tr['from_case']} -> {tr['to_case']}{middle}"
            )
        for message in result["warnings"]:
            print(f"warning: {message}")
    else:
        _print_report(result["report"])
    return EXIT_OK


def cmd_trace(client: httpx.Client, args: argparse.Namespace) -> int:
    x, y, slope = _floats(getattr(args, "from"), 3, "--from")
    payload: dict[str, object] = {
        "metric": metric_source(args),
        "start": (x, y),
        "span": args.len,
        "orientation": args.orientation,
        "mode": "natural" if args.natural else ("isotropic" if args.isotropic else "geodesic"),
    }
    if args.vertical:
        payload["vertical"] = True
    else:
        payload["slope"] = slope
    if args.bbox:
        payload["bbox"] = _floats(args.bbox, 4, "--bbox")
    options = _integrator_params(args.tol if args.tol is not None else env_tolerance())
    if options:
        payload["options"] = options
    result = call(client, "POST", "/trace", json=payload)
    if args.json:
        print(json.dumps(result["curve"], indent=2))
        return EXIT_OK
    body = result["csv"]
    if body is None:
        body = json.dumps(result["curve"], indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(body)
        curve = result["curve"]
        print(f"wrote {args.out} ({curve['termination']}, {len(curve['x'])} samples)")
    else:
        sys.stdout.write(body)
    return EXIT_OK


def cmd_family(client: httpx.Client, args: argparse.Namespace) -> int:
    payload: dict[str, object] = {
        "metric": metric_source(args),
        "count": args.count,
        "tau0": args.tau0,
        "span": args.span,
    }
    if args.point:
        payload["point"] = _floats(args.point, 2, "--point")
    result = call(client, "POST", "/family", json=payload)
    files = result.pop("files", {})
    if args.out:
        root = Path(args.out)
        (root / "members").mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (root / name).write_text(text)
        (root / "family.json").write_text(json.dumps(result, indent=2) + "\n")
    if args.json:
        print(json.dumps(result, indent=2))
        return EXIT_OK
    family = result["family"]
    qx, qy = family["point"]
    print(f"case: {family['case']} at ({qx:g}, {qy:g})")
    print(f"entry direction: {_direction_text(_root_like(family['direction']))}")
    members = family["members"]
    kinds: dict[str, int] = {}
    for member in members:
        kinds[member["causal_type"]] = kinds.get(member["causal_type"], 0) + 1
    counts = ", ".join(f"{v} {k}" for k, v in sorted(kinds.items()))
    print(f"members: {len(members)} ({counts})")
    for key, value in sorted(family.get("metadata", {}).items()):
        if key == "riemannian_probes":
            reached = sum(1 for probe in value if probe.get("reached"))
            print(f"riemannian probes: {len(value)}, reached: {reached}")
        elif not isinstance(value, (dict, list)):
            print(f"{key}: {value}")
    for pair in result.get("pairs", []):
        if "error" in pair:
            print(f"pair {_direction_text(_root_like(pair['direction']))}: {pair['error']}")
        else:
            print(
                f"pair {_direction_text(_root_like(pair['direction']))}: "
                f"gap {pair['continuation_gap']:.3e}, types {pair['causal_types']}"
            )
    for problem in result.get("problems", []):
        print(f"problem: {problem}")
    for message in family.get("warnings", []):
        print(f"warning: {message}")
    if args.out:
        print(f"wrote {args.out}/family.json and {len(files)} member traces")
    return EXIT_OK


def cmd_portrait(client: httpx.Client, args: argparse.Namespace) -> int:
    if not args.out:
        raise UsageError("portrait needs --out FILE.svg")
    payload: dict[str, object] = {
        "metric": metric_source(args),
        "family": args.family,
        "seed": args.seed,
        "span": args.span,
        "tau0": args.tau0,
        "size": args.size,
    }
    if args.grid or not args.family:
        payload["grid"] = True
    if args.count is not None:
        payload["count"] = args.count
    if args.point:
        payload["point"] = _floats(args.point, 2, "--point")
    if args.bbox:
        payload["bbox"] = _floats(args.bbox, 4, "--bbox")
    if args.jobs is not None:
        payload["jobs"] = args.jobs
    artifacts = call(client, "POST", "/portrait", json=payload)
    manifest = write_bundle(artifacts, args.out)
    if args.json:
        print(json.dumps(manifest, indent=2))
    else:
        n = len(manifest["curves"])
        stem = Path(manifest["svg"]).stem
        print(f"wrote {manifest['svg']} and {n} curve CSVs in {stem}_curves/")
    return EXIT_OK


_STAT_PICKS = (
    "worst_resonance_defect",
    "worst_pair_defect",
    "worst_residual",
    "worst_hausdorff",
    "worst_peak_F",
    "worst_drift",
)


def cmd_check(client: httpx.Client, args: argparse.Namespace) -> int:
    params: dict[str, object] = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            params[key] = json.loads(raw)
        except ValueError:
            params[key] = raw
    if args.seed is not None:
        params.setdefault("seed", args.seed)
    payload: dict[str, object] = {"suite": args.suite, "params": params}
    if args.jobs is not None:
        payload["jobs"] = args.jobs
    result = call(client, "POST", "/check", json=payload)
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        for report in result["reports"]:
            verdict = "pass" if report["passed"] else "FAIL"
            stats = report.get("stats", {})
            shown = "  ".join(
                f"{key}={stats[key]:.3g}"
                for key in _STAT_PICKS
                if isinstance(stats.get(key), (int, float))
            )
            print(f"{report['suite']:<12} {verdict}  trials={report['trials']}  {shown}")
            for failure in report.get("failures", []):
                print(f"  failure: {json.dumps(failure)}")
    return EXIT_OK if result["passed"] else EXIT_CHECK


def cmd_serve(client: httpx.Client, args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> Parser:
    parser = Parser(prog="pseudogeo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p: Parser, metric: bool = True) -> None:
        p.add_argument("--server", help="remote service URL (default: in-process)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if metric:
            p.add_argument(
                "--metric",
                help="catalog:<name>[(param)] | inline 'a=..;b=..;c=..' | @file",
            )
            p.add_argument("--eps", help="parameter for --metric catalog:dd")
            p.add_argument("--y1", help="parameter for --metric catalog:c1c3")

    p = sub.add_parser("catalog", help="list catalog metrics or show one")
    p.add_argument("name", nargs="?", help="catalog entry to expand")
    p.add_argument("--value", type=float, help="parameter value for the entry")
    common(p, metric=False)
    p.set_defaults(handler=cmd_catalog)

    p = sub.add_parser("classify", help="classify degenerate points")
    common(p)
    p.add_argument("--point", help="x,y seed; snapped to the degenerate curve")
    p.add_argument("--scan", action="store_true", help="walk the whole degenerate curve")
    p.add_argument("--step", type=float, help="arc-length spacing for --scan")
    p.add_argument("--tol", type=float, help="classification tolerance")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("trace", help="integrate one geodesic and emit CSV")
    common(p)
    p.add_argument("--from", required=True, metavar="X,Y,P", help="start jet (slope P)")
    p.add_argument("--len", type=float, default=4.0, help="parameter span")
    p.add_argument("--vertical", action="store_true", help="start with vertical direction")
    p.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    p.add_argument("--isotropic", action="store_true", help="trace the null curve instead")
    p.add_argument("--natural", action="store_true", help="arc-type parametrization instead")
    p.add_argument("--bbox", help="x0,x1,y0,y1 working window")
    p.add_argument("--tol", type=float, help="integrator relative tolerance")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(handler=cmd_trace)

    p = sub.add_parser("family", help="build the geodesic family at a degenerate point")
    common(p)
    p.add_argument("--point", help="x,y seed for the degenerate point")
    p.add_argument("--count", type=int, default=12, help="members per family")
    p.add_argument("--tau0", type=float, default=1e-3, help="seed offset scale")
    p.add_argument("--span", type=float, default=4.0, help="parameter span per member")
    p.add_argument("--out", help="directory for family.json and member traces")
    p.set_defaults(handler=cmd_family)

    p = sub.add_parser("portrait", help="draw an SVG portrait with CSV bundle")
    common(p)
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--family", action="store_true", help="draw the family at a degenerate point")
    p.add_argument("--grid", action="store_true", help="draw a seeded grid of geodesics")
    p.add_argument("--point", help="x,y family point (default: located automatically)")
    p.add_argument("--count", type=int, help="curves per mode")
    p.add_argument("--seed", type=int, default=0, help="grid seed")
    p.add_argument("--span", type=float, default=4.0, help="family parameter span")
    p.add_argument("--tau0", type=float, default=1e-3, help="family seed offset scale")
    p.add_argument("--bbox", help="x0,x1,y0,y1 drawing window")
    p.add_argument("--size", type=int, default=640, help="SVG edge length in px")
    p.add_argument("--jobs", type=int, help="integration worker threads")
    p.set_defaults(handler=cmd_portrait)

    p = sub.add_parser("check", help="run structural-invariant suites")
    p.add_argument(
        "suite",
        nargs="?",
        default="all",
        help="resonance | divergence | oracle | invariance | all",
    )
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="suite parameter")
    p.add_argument("--seed", type=int, help="randomization seed")
    p.add_argument("--jobs", type=int, help="trial worker threads")
    common(p, metric=False)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve, server=None, json=False)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        with make_client(args.server) as client:
            return args.handler(client, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EngineFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
