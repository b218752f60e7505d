"""``hullwrap`` command line: contract, validate, bench.

Exit codes: 0 success, 1 input or configuration error, 2 failed check or
stalled run. Summaries go to stdout as JSON, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .bench import HARD_SLOPE, discrepancy_lines, records_csv, run_bench, summarize
from .contraction import ContractionConfig, Outcome, contract
from .errors import HullwrapError
from .mesh_io import read_cloud, read_mesh, read_trace, write_mesh, write_trace
from .validation import validate

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2

log = logging.getLogger("hullwrap")


def _emit(summary: dict) -> None:
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _witness(decision) -> dict:
    return {"reason": decision.reason, "witness": repr(decision.witness)}


def cmd_contract(args) -> int:
    config = ContractionConfig(priority=args.priority, fallback_breadth=args.fallback_breadth,
                               snapshots=args.snapshots)
    cloud = read_cloud(args.input if args.input else args.generate, seed=args.seed)
    result = contract(cloud, config)
    mesh = result.mesh
    if args.output:
        write_mesh(mesh, args.output, args.format)
    if args.trace_dir:
        write_trace(result.trace, args.trace_dir)
    final = result.trace.states[-1]
    summary = {
        "source": str(args.input or args.generate),
        "n": len(cloud),
        "merged_duplicates": len(cloud.merged),
        "hull_vertices": result.hull_vertices,
        "insertions": result.insertions,
        "n_minus_m": len(cloud) - result.hull_vertices,
        "passes": result.passes,
        "outcome": result.outcome.value,
        "facets": len(mesh.facets),
        "metric": final.metric,
        "volume": final.volume,
        "area": final.area,
        "hausdorff": final.hausdorff,
        "priority": config.priority.value,
        "fallback_breadth": config.fallback_breadth,
        "output": args.output,
        "blocked": {str(p): _witness(d) for p, d in result.blocked.items()},
        "timings": result.timings,
    }
    code = EXIT_OK
    if result.outcome is Outcome.STALLED:
        log.error("stalled with %d point(s) left; see 'blocked' in the summary", len(result.blocked))
        code = EXIT_CHECK
    if args.validate:
        report = validate(mesh, cloud, result.trace)
        summary["validation"] = report.to_dict()
        if not report.passed:
            log.error("validation failed")
            code = EXIT_CHECK
    _emit(summary)
    return code


def cmd_validate(args) -> int:
    mesh = read_mesh(args.mesh)
    cloud = read_cloud(args.cloud)
    trace = read_trace(args.trace) if args.trace else None
    report = validate(mesh, cloud, trace)
    _emit(report.to_dict())
    if not report.passed:
        failed = [f for f in report.FLAGS if not getattr(report, f)]
        if not report.trace_ok:
            failed.append("trace")
        log.error("failed checks: %s", ", ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def _sizes(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    records = run_bench(args.sizes, args.generator, args.repeats, args.seed)
    table = records_csv(records)
    summary = summarize(records)
    for line in discrepancy_lines(records):
        print(line, file=sys.stderr)
    s = summary["slopes"]
    print(f"log-log slope total={s['total']:.3f} prioritize={s['prioritize']:.3f} "
          f"(reference {summary['sort_reference_slope']:.3f}) hull={s['hull']:.3f} "
          f"insert_guard={s['insert_guard']:.3f} validate={s['validate']:.3f}", file=sys.stderr)
    if args.csv:
        Path(args.csv).write_text(table)
        _emit(summary)
    else:
        sys.stdout.write(table)
        print(json.dumps(summary, indent=2, sort_keys=True), file=sys.stderr)
    if summary["total_slope_hard_fail"]:
        log.error("total-time slope %.3f exceeds %.1f", s["total"], HARD_SLOPE)
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hullwrap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contract", help="contract the hull of a cloud onto all its points")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="cloud file (.xyz, .csv, .ply)")
    src.add_argument("--generate", metavar="SPEC", help="generator spec, e.g. 'ball-uniform(500,1)'")
    p.add_argument("--output", metavar="PATH", help="mesh output (.obj or .ply)")
    p.add_argument("--format", choices=("obj", "ply"), help="mesh format (default: from extension)")
    p.add_argument("--priority", choices=("centroid", "true"), default="centroid")
    p.add_argument("--fallback-breadth", type=int, default=8, metavar="K")
    p.add_argument("--trace-dir", metavar="DIR", help="write trace.csv (and snapshots) here")
    p.add_argument("--snapshots", action="store_true", help="store an OBJ per step in --trace-dir")
    p.add_argument("--seed", type=int, default=None, metavar="N", help="override the generator seed")
    p.add_argument("--validate", action="store_true", help="run all checks on the result")
    p.set_defaults(func=cmd_contract)

    p = sub.add_parser("validate", help="check a mesh against a cloud (and optionally a trace)")
    p.add_argument("--mesh", required=True, metavar="PATH")
    p.add_argument("--cloud", required=True, metavar="PATH")
    p.add_argument("--trace", metavar="PATH", help="trace.csv written by 'contract --trace-dir'")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="time contraction over a size series")
    p.add_argument("--sizes", type=_sizes, default=[100, 200, 400, 800, 1600, 3200], metavar="LIST")
    p.add_argument("--generator", default="ball-uniform", metavar="NAME")
    p.add_argument("--repeats", type=int, default=1, metavar="R")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--csv", metavar="PATH", help="write the table here (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; usage errors are input errors here
        return EXIT_INPUT if exc.code else EXIT_OK
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("hullwrap: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    log.propagate = False
    try:
        if args.command == "contract" and args.snapshots and not args.trace_dir:
            log.error("--snapshots needs --trace-dir")
            return EXIT_INPUT
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: log.warning("%s", msg)
            try:
                return args.func(args)
            except (HullwrapError, ValueError, OSError) as exc:
                log.error("%s", exc)
                return EXIT_INPUT
    finally:
        log.removeHandler(handler)

if __name__ == "__main__":
    sys.exit(main())
