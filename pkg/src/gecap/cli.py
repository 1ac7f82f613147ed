"""Command-line interface.

Standard output carries only JSON or CSV; progress and summaries go to
standard error. Exit codes: 0 success, 1 I/O or parse error, 2 invalid
operation or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from typing import Sequence

from . import pdl
from .capacity import classical_bounds, quantum_bounds
from .exceptions import (
    DimensionMismatchError,
    InvalidOperationError,
    InvalidParametersError,
    NotPSDError,
    NumericalFailure,
    UnsupportedRankError,
)
from .operations import MAP_TOL, Classification, KrausMap, kraus_map_from_json, validation_report
from .optimize import DEFAULT_SEED

SCHEMA_VERSION = 1
EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _floats(text: str, count: int, flag: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise CliError(f"{flag}: expected {count} comma-separated numbers, got {text!r}", EXIT_IO) from exc
    if len(values) != count:
        raise CliError(f"{flag}: expected {count} comma-separated numbers, got {text!r}", EXIT_IO)
    return values


def _load_operation(args) -> KrausMap:
    if args.pdl is not None:
        p_h, p_v = _floats(args.pdl, 2, "--pdl")
        record = {"pdl": {"p_h": p_h, "p_v": p_v}}
    elif args.phase_covariant is not None:
        a, b, c, d = _floats(args.phase_covariant, 4, "--phase-covariant")
        record = {"phase_covariant": {"a": a, "b": b, "c": c, "d": d}}
    elif args.spec is not None:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                record = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read {args.spec}: {exc}", EXIT_IO) from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.spec} is not valid JSON: {exc}", EXIT_IO) from exc
    else:
        raise CliError("give the operation with --spec, --pdl or --phase-covariant", EXIT_IO)
    try:
        return kraus_map_from_json(record)
    except (InvalidParametersError, InvalidOperationError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise CliError(f"malformed operation record: {exc}", EXIT_IO) from exc


def _pdl_params(args) -> tuple[float, float]:
    if args.pdl is None:
        raise CliError("--pdl p_h,p_v is required", EXIT_IO)
    p_h, p_v = _floats(args.pdl, 2, "--pdl")
    if not (0.0 <= p_h <= 1.0 and 0.0 <= p_v <= 1.0):
        raise CliError(f"--pdl values must lie in [0, 1], got ({p_h}, {p_v})", EXIT_INVALID)
    return p_h, p_v


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc
    with fh:
        yield fh


def _emit_json(record: dict, path: str | None) -> None:
    with _output(path) as out:
        json.dump({"schema_version": SCHEMA_VERSION, **record}, out, indent=2, sort_keys=False)
        out.write("\n")


def cmd_validate(args) -> int:
    op = _load_operation(args)
    report = validation_report(op, tol=args.tol if args.tol is not None else MAP_TOL)
    _emit_json({"command": "validate", **report}, args.output)
    print(f"classification: {report['classification']}", file=sys.stderr)
    return EXIT_INVALID if report["classification"] == Classification.INVALID.value else EXIT_OK


def cmd_bounds(args) -> int:
    op = _load_operation(args)
    if args.which == "classical":
        report = classical_bounds(op, holevo=args.holevo, restarts=args.restarts, seed=args.seed)
    else:
        report = quantum_bounds(op, restarts=args.restarts, seed=args.seed)
    _emit_json({"command": "bounds", "which": args.which, **report.to_dict()}, args.output)
    print(f"{args.which} capacity in [{report.lower:.6g}, {report.upper:.6g}] bits", file=sys.stderr)
    for note in report.diagnostics:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_q1_pdl(args) -> int:
    result = pdl.solve_q1_pdl(*_pdl_params(args))
    _emit_json({"command": "q1-pdl", **result.to_dict()}, args.output)
    print(f"Q1 = {result.q1:.12g} bits", file=sys.stderr)
    return EXIT_OK


def cmd_superadd(args) -> int:
    p_h, p_v = _pdl_params(args)
    print(f"optimizing two-letter coherent information ({args.restarts} restarts)", file=sys.stderr)
    report = pdl.superadditivity_report(p_h, p_v, restarts=args.restarts, seed=args.seed)
    _emit_json({"command": "superadd", **report.to_dict()}, args.output)
    print(f"gap = {report.gap:.6e} bits (lower bound {report.lower_bound:.6e})", file=sys.stderr)
    return EXIT_OK


def cmd_scan(args) -> int:
    region = tuple(_floats(args.region, 4, "--region")) if args.region else None
    resolution = args.resolution or pdl.default_resolution(args.kind)
    if resolution < 2:
        raise CliError("--resolution must be at least 2", EXIT_IO)
    rows = pdl.scan_grid(args.kind, resolution, region, restarts=args.restarts, seed=args.seed,
                         workers=args.workers)
    with _output(args.output) as out:
        pdl.write_csv(rows, out)
    p_h, p_v, value = pdl.argmax_row(rows)
    print(f"{args.kind}: {len(rows)} cells, max {value:.6e} at p_h={p_h:.6g}, p_v={p_v:.6g}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gecap", description="Capacities of generalized erasure channels.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default 42)")
    common.add_argument("--restarts", type=int, default=None, help="optimizer restarts")
    common.add_argument("--tol", type=float, default=None, help="validation tolerance")
    common.add_argument("--output", "-o", default=None, help="output path (default stdout)")

    operation = argparse.ArgumentParser(add_help=False)
    source = operation.add_mutually_exclusive_group()
    source.add_argument("--spec", help="Kraus map JSON file")
    source.add_argument("--pdl", metavar="P_H,P_V", help="polarization dependent loss")
    source.add_argument("--phase-covariant", metavar="A,B,C,D", help="phase-covariant qubit operation")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", parents=[common, operation], help="classify a Kraus map")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", parents=[common, operation], help="capacity bounds of the erasure channel")
    p.add_argument("--which", choices=("classical", "quantum"), default="classical")
    p.add_argument("--holevo", action="store_true", help="add the optimized Holevo bracket")
    p.set_defaults(func=cmd_bounds, default_restarts=32)

    p = sub.add_parser("q1-pdl", parents=[common], help="single-letter quantum capacity for PDL")
    p.add_argument("--pdl", metavar="P_H,P_V", required=True)
    p.set_defaults(func=cmd_q1_pdl)

    p = sub.add_parser("superadd", parents=[common], help="two-letter superadditivity report for PDL")
    p.add_argument("--pdl", metavar="P_H,P_V", required=True)
    p.set_defaults(func=cmd_superadd, default_restarts=pdl.TWO_LETTER_RESTARTS)

    p = sub.add_parser("scan", parents=[common], help="grid scan written as CSV")
    p.add_argument("kind", nargs="?", choices=pdl.SCAN_KINDS, default="q1-heatmap")
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--region", metavar="H0,H1,V0,V1", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_scan, default_restarts=pdl.TWO_LETTER_RESTARTS)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    if args.restarts is None:
        args.restarts = getattr(args, "default_restarts", 32)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidOperationError, InvalidParametersError, DimensionMismatchError, NotPSDError,
            UnsupportedRankError) as exc:
        print(f"error: invalid operation: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
