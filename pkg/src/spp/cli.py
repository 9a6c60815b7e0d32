"""Command-line front end.

    spp [run] --input FILE [--format tlist|libsvm] [--task reg|clf] ...
    spp synth --n N --d D [--task reg|clf] [--seed S] [--out FILE]

Exit codes: 0 success, 2 bad flags, 3 data errors, 4 solver abort.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, oracle
from .pattern_db import (DataError, dumps_transactions, load_transactions,
                         normalize_task, save_item_map)
from .path import PathConfig, SolverAbort, run_path
from .screening import ScreeningError
from .task import TaskSpec

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4

SUMMARY_FIELDS = ["lambda", "bias", "gap", "n_active", "n_kept", "nodes_visited",
                  "nodes_pruned", "solve_epochs", "traverse_ms", "solve_ms",
                  "verify_max"]

log = logging.getLogger("spp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _ratio(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"ratio must lie in (0, 1), got {text}")
    return v


def run_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spp", description="L1-penalized pattern regression/classification "
                "path with safe pattern pruning.")
    p.add_argument("--input", required=True, help="dataset file")
    p.add_argument("--format", choices=["tlist", "libsvm"], default="tlist")
    p.add_argument("--task", choices=["reg", "clf"], default="reg")
    p.add_argument("--method", choices=["spp", "boosting", "naive"], default="spp")
    p.add_argument("--maxpat", type=_positive_int, default=3,
                   help="maximum item-set size (default 3)")
    p.add_argument("--nlambda", type=_nonneg_int, default=100,
                   help="number of grid steps below lambda_max (default 100)")
    p.add_argument("--lmin-ratio", type=_ratio, default=0.01)
    p.add_argument("--tol", type=_positive_float, default=1e-6,
                   help="duality-gap tolerance (default 1e-6)")
    p.add_argument("--out", default="spp_out", help="output directory")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--verify", action="store_true",
                   help="check every dual constraint on the full tree after each solve")
    p.add_argument("--no-timings", action="store_true",
                   help="write null timings so repeated runs are byte-identical")
    p.add_argument("--naive-cap", type=_positive_int, default=oracle.DEFAULT_CAP)
    p.add_argument("--seed", type=int, default=None,
                   help="accepted for symmetry with 'synth'; runs are deterministic")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def synth_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spp synth", description="Write a synthetic transaction-list dataset.")
    p.add_argument("--n", type=int, required=True, help="number of transactions")
    p.add_argument("--d", type=int, required=True, help="number of distinct items")
    p.add_argument("--task", choices=["reg", "clf"], default="reg")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    return p


def _record_json(db, rec, timings: bool) -> dict:
    weights = [{"items": db.decode(p), "w": w} for p, w in sorted(rec.model.weights.items())]
    return {
        "lambda": rec.lam,
        "bias": rec.model.intercept,
        "weights": weights,
        "gap": rec.gap,
        "n_active": rec.n_active,
        "n_kept": rec.n_kept,
        "nodes_visited": rec.nodes_visited,
        "nodes_pruned": rec.nodes_pruned,
        "solve_epochs": rec.solve_epochs,
        "traverse_ms": rec.traverse_ms if timings else None,
        "solve_ms": rec.solve_ms if timings else None,
        "verify_max": rec.verify_max,
    }


def write_outputs(out: Path, db, result, manifest: dict, timings: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = [_record_json(db, rec, timings) for rec in result.records]
    with open(out / "path.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in SUMMARY_FIELDS})
    save_item_map(db, out / "items.json")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_run(argv) -> int:
    args = run_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    task = normalize_task(args.task)
    started = _now()
    try:
        db = load_transactions(args.input, args.format, task)
    except FileNotFoundError:
        print(f"spp: error: no such file {args.input}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"spp: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    config = PathConfig(num_lambdas=args.nlambda, lambda_min_ratio=args.lmin_ratio,
                        tol=args.tol, maxpat=args.maxpat, method=args.method,
                        verify=args.verify, threads=args.threads,
                        naive_cap=args.naive_cap)
    try:
        result = run_path(db, TaskSpec(task), config)
    except (DataError, ScreeningError, oracle.OracleCapError) as exc:
        print(f"spp: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverAbort as exc:
        print(f"spp: solver aborted: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    manifest = {
        "tool": "spp",
        "version": __version__,
        "input": str(args.input),
        "format": args.format,
        "task": task,
        "config": dataclasses.asdict(config),
        "dataset": db.fingerprint(),
        "lambda_max": result.lambda_max,
        "started": started,
        "finished": _now(),
    }
    write_outputs(Path(args.out), db, result, manifest, timings=not args.no_timings)
    return EXIT_OK


def cmd_synth(argv) -> int:
    args = synth_parser().parse_args(argv)
    if args.n < 1 or args.d < 1:
        print("spp synth: error: --n and --d must be positive", file=sys.stderr)
        return EXIT_USAGE
    task = normalize_task(args.task)
    if task == "classification" and args.n < 2:
        print("spp synth: error: classification needs --n >= 2", file=sys.stderr)
        return EXIT_USAGE
    text = dumps_transactions(oracle.synth_db(args.n, args.d, task, args.seed))
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "synth":
            return cmd_synth(argv[1:])
        if argv and argv[0] == "run":
            argv = argv[1:]
        return cmd_run(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
