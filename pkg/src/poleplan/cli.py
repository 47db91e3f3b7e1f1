"""Batch entry points: plan, synth, manifest, dedup, serve.

Exit codes: 0 success, 1 usage error, 2 input-format error, 3 infeasible
plan (no candidates left for a non-empty demand grid).
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
import time
from dataclasses import fields as dataclass_fields
from pathlib import Path

from .coverage import DEFAULT_GRID_SPACING_M, DEFAULT_RADIUS_M, InfeasibleProblemError
from .geo import BBoxLTRD, GeoPoint
from .immune import ImmuneParams
from .ingest import (
    DEFAULT_MERGE_RADIUS_M,
    DetectionFormatError,
    build_capture_manifest,
    candidates_to_csv,
    dedup_merge,
    detections_to_csv,
    manifest_to_json,
    parse_detections,
    synth_scenario,
    zones_from_geojson,
)
from .pipeline import PlanSpec, execute_plan
from .report import geojson_dumps

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

_IMMUNE_FIELDS = {f.name for f in dataclass_fields(ImmuneParams)}
_CONFIG_KEYS = {"bbox", "radius_m", "grid_spacing_m", "r_merge_m", "exclusions", "immune", "seed"}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1 (not 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class InputError(Exception):
    """Unreadable or malformed input file; maps to exit code 2."""


def parse_bbox(text: str) -> BBoxLTRD:
    """'lt_lat,lt_lon,rd_lat,rd_lon' per the left-top/right-down convention."""
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"bbox needs 4 comma-separated numbers, got {len(parts)}")
    lt_lat, lt_lon, rd_lat, rd_lon = (float(p) for p in parts)
    return BBoxLTRD(GeoPoint(lt_lat, lt_lon), GeoPoint(rd_lat, rd_lon))


def load_plan_config(path: str) -> dict:
    """Strict plan config: unknown keys are rejected."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise InputError(f"config {path} must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise InputError(f"config {path} has unknown keys: {', '.join(sorted(unknown))}")
    if "immune" in doc:
        if not isinstance(doc["immune"], dict):
            raise InputError("config key 'immune' must be an object")
        bad = set(doc["immune"]) - _IMMUNE_FIELDS
        if bad:
            raise InputError(f"config immune has unknown keys: {', '.join(sorted(bad))}")
    if "bbox" in doc:
        bbox = doc["bbox"]
        want = {"lt", "rd"}
        if not isinstance(bbox, dict) or set(bbox) != want:
            raise InputError("config bbox must be an object with keys lt and rd")
    return doc


def _config_bbox(doc: dict) -> BBoxLTRD:
    lt, rd = doc["lt"], doc["rd"]
    return BBoxLTRD(GeoPoint(float(lt["lat"]), float(lt["lon"])), GeoPoint(float(rd["lat"]), float(rd["lon"])))


def _read_detections(path: str, fmt: str | None):
    if fmt is None:
        fmt = "geojson" if path.endswith((".geojson", ".json")) else "csv"
    try:
        with open(path, "rb") as fh:
            return parse_detections(fh, fmt)
    except OSError as e:
        raise InputError(f"cannot read detections {path}: {e}") from None
    except DetectionFormatError as e:
        raise InputError(f"{path}: {e}") from None


def _read_zones(path: str | None, config: dict):
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise InputError(f"cannot read exclusions {path}: {e}") from None
        try:
            return zones_from_geojson(text)
        except DetectionFormatError as e:
            raise InputError(f"{path}: {e}") from None
    if "exclusions" in config:
        try:
            return zones_from_geojson(config["exclusions"])
        except DetectionFormatError as e:
            raise InputError(f"config exclusions: {e}") from None
    return []


def cmd_plan(args) -> int:
    config = load_plan_config(args.config) if args.config else {}

    if args.bbox is not None:
        bbox = parse_bbox(args.bbox)
    elif "bbox" in config:
        bbox = _config_bbox(config["bbox"])
    else:
        print("error: --bbox is required (flag or config)", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return config.get(key, default)

    immune_kwargs = dict(config.get("immune", {}))
    for name in ("pop_size", "max_generations", "stall_limit"):
        flag = getattr(args, name)
        if flag is not None:
            immune_kwargs[name] = flag
    try:
        params = ImmuneParams(**immune_kwargs)
        spec = PlanSpec(
            bbox=bbox,
            radius_m=float(pick(args.radius, "radius_m", DEFAULT_RADIUS_M)),
            grid_spacing_m=float(pick(args.grid, "grid_spacing_m", DEFAULT_GRID_SPACING_M)),
            r_merge_m=float(pick(args.merge_radius, "r_merge_m", DEFAULT_MERGE_RADIUS_M)),
            zones=tuple(_read_zones(args.exclusions, config)),
            params=params,
            seed=int(pick(args.seed, "seed", 0)),
        )
    except (TypeError, ValueError) as e:
        raise InputError(f"bad plan parameters: {e}") from None

    detections = _read_detections(args.detections, args.format)
    t0 = time.perf_counter()
    outcome = execute_plan(detections, spec)
    wall = time.perf_counter() - t0

    Path(args.out).write_text(geojson_dumps(outcome.geojson))
    result = outcome.result
    print(f"candidates: {len(outcome.kept)} ({len(outcome.dropped)} dropped by exclusion zones)")
    print(f"selected: {len(result.selected)} poles")
    print(
        f"coverage: {result.cov * 100:.2f}% of {outcome.problem.n_coverable} coverable demand points"
        f" ({len(result.uncoverable)} uncoverable)"
    )
    print(f"generations: {result.generations_run}")
    print(f"wall time: {wall:.2f}s")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    bbox = parse_bbox(args.bbox)
    records = synth_scenario(args.seed, bbox, args.poles, args.dup_rate, args.jitter)
    Path(args.out).write_text(detections_to_csv(records))
    print(f"wrote {len(records)} detections ({args.poles} true poles) to {args.out}")
    return EXIT_OK


def cmd_manifest(args) -> int:
    bbox = parse_bbox(args.bbox)
    entries = build_capture_manifest(bbox, args.spacing, args.url_template)
    Path(args.out).write_text(manifest_to_json(entries))
    print(f"wrote {len(entries)} capture entries to {args.out}")
    return EXIT_OK


def cmd_dedup(args) -> int:
    detections = _read_detections(args.detections, args.format)
    candidates = dedup_merge(detections, args.merge_radius)
    Path(args.out).write_text(candidates_to_csv(candidates))
    print(f"merged {len(detections)} detections into {len(candidates)} candidates; wrote {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSettings, create_app

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as e:
        print(f"cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return EXIT_INPUT

    settings = ServiceSettings(
        workers=args.workers, max_queue=args.max_queue, results_dir=args.results_dir
    )
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="poleplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="plan pole placement from a detections file")
    plan.add_argument("--detections", required=True, help="detections file (CSV or GeoJSON)")
    plan.add_argument("--format", choices=["csv", "geojson"], help="detections format (default: by extension)")
    plan.add_argument("--bbox", help="lt_lat,lt_lon,rd_lat,rd_lon planning rectangle")
    plan.add_argument("--radius", type=float, help=f"coverage radius in meters (default {DEFAULT_RADIUS_M:g})")
    plan.add_argument("--grid", type=float, help=f"demand grid spacing in meters (default {DEFAULT_GRID_SPACING_M:g})")
    plan.add_argument("--merge-radius", type=float, help=f"dedup merge radius in meters (default {DEFAULT_MERGE_RADIUS_M:g})")
    plan.add_argument("--exclusions", help="GeoJSON file with exclusion polygons")
    plan.add_argument("--seed", type=int, help="optimizer seed (default 0)")
    plan.add_argument("--config", help="JSON plan config; explicit flags win")
    plan.add_argument("--pop-size", type=int, dest="pop_size", help="immune population size")
    plan.add_argument("--max-generations", type=int, dest="max_generations", help="immune generation cap")
    plan.add_argument("--stall-limit", type=int, dest="stall_limit", help="stop after this many stalled generations")
    plan.add_argument("--out", required=True, help="output plan GeoJSON path")
    plan.set_defaults(func=cmd_plan)

    synth = sub.add_parser("synth", help="generate a synthetic detection scenario")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--bbox", required=True, help="lt_lat,lt_lon,rd_lat,rd_lon")
    synth.add_argument("--poles", type=int, required=True, help="number of true poles")
    synth.add_argument("--dup-rate", type=float, default=0.0, dest="dup_rate", help="Poisson rate of duplicate detections per pole")
    synth.add_argument("--jitter", type=float, default=0.0, help="max duplicate offset in meters")
    synth.add_argument("--out", required=True, help="output detections CSV path")
    synth.set_defaults(func=cmd_synth)

    manifest = sub.add_parser("manifest", help="emit a street-imagery capture manifest")
    manifest.add_argument("--bbox", required=True, help="lt_lat,lt_lon,rd_lat,rd_lon")
    manifest.add_argument("--spacing", type=float, required=True, help="capture grid spacing in meters")
    manifest.add_argument("--url-template", dest="url_template", help="optional URL template with {lat},{lon},{heading},{fov}")
    manifest.add_argument("--out", required=True, help="output manifest JSON path")
    manifest.set_defaults(func=cmd_manifest)

    dedup = sub.add_parser("dedup", help="merge repeated detections into candidates")
    dedup.add_argument("--detections", required=True, help="detections file (CSV or GeoJSON)")
    dedup.add_argument("--format", choices=["csv", "geojson"], help="detections format (default: by extension)")
    dedup.add_argument("--merge-radius", type=float, default=DEFAULT_MERGE_RADIUS_M, dest="merge_radius")
    dedup.add_argument("--out", required=True, help="output candidates CSV path")
    dedup.set_defaults(func=cmd_dedup)

    # flags win over POLEPLAN_* environment variables
    env = os.environ
    serve = sub.add_parser("serve", help="start the planning job service")
    serve.add_argument("--host", default=env.get("POLEPLAN_HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=int(env.get("POLEPLAN_PORT", 8080)))
    serve.add_argument("--workers", type=int, default=int(env.get("POLEPLAN_WORKERS", 1)), help="concurrent planning jobs")
    serve.add_argument("--max-queue", type=int, default=int(env.get("POLEPLAN_MAX_QUEUE", 16)), dest="max_queue")
    serve.add_argument(
        "--results-dir", dest="results_dir", default=env.get("POLEPLAN_RESULTS_DIR"),
        help="write finished plans here, one JSON per job",
    )
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except SystemExit as e:
        return int(e.code or 0)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except DetectionFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleProblemError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
