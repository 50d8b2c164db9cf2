"""Command-line entry point.

    optba run      --config CFG --out DIR [--seed S] [--overwrite] [--workers N] [-v]
    optba bench    --config CFG --out DIR [--seed S] [--overwrite] [--workers N] [-v]
    optba validate --config CFG

Exit codes: 0 success, 1 configuration error, 2 objective failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine, harness
from .config import load_config
from .errors import InvalidConfig, ObjectiveFailure, OptBAError
from .objectives import build_objective

EXIT_OK, EXIT_CONFIG, EXIT_OBJECTIVE, EXIT_IO = 0, 1, 2, 3

RUN_FILES = ("config.json", "trace.json", "convergence.csv")
BENCH_FILES = ("config.json", "trials.csv", "summary.json")
RUN_FIGURE = "convergence.png"
BENCH_FIGURE = "comparison.png"


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optba", description="Bees Algorithm hyperparameter search.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_out, help_text in (
        ("run", True, "optimize once and write the run trace"),
        ("bench", True, "compare BA with random/grid search over paired seeds"),
        ("validate", False, "check a config file and print warnings"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="JSON config file")
        p.add_argument("--out", required=needs_out, type=Path, help="output directory")
        p.add_argument("--seed", type=_u64, help="override ba.seed")
        p.add_argument("--overwrite", action="store_true", help="replace existing output files")
        p.add_argument("--workers", type=_positive,
                       default=_positive(os.environ.get("OPTBA_WORKERS", "1")),
                       help="parallel objective evaluations (default: $OPTBA_WORKERS or 1)")
        p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")
        p.add_argument("-v", "--verbose", action="count", default=0,
                       help="-v prints each iteration; -vv also stores population snapshots")
    return parser


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def format_best(names, candidate) -> str:
    params = ",".join(f"{n}:{v}" for n, v in zip(names, candidate.params))
    return f"best: {{{params}}} fitness={candidate.fitness:.10g}"


def _prepare_out(out: Path, files, overwrite: bool):
    existing = [f for f in files if (out / f).exists()]
    if existing and not overwrite:
        raise FileExistsError(f"{out} already holds {', '.join(existing)}; pass --overwrite to replace")
    out.mkdir(parents=True, exist_ok=True)


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load(args, experiment=False):
    return load_config(args.config, seed=args.seed, experiment=experiment)


def cmd_validate(args) -> int:
    cfg = _load(args, experiment=False)
    for w in cfg.warnings:
        print(f"warning: {w}")
    print(f"ok: {cfg.space.ndim} parameters, {cfg.space.cardinality} grid points, "
          f"{cfg.ba.evaluations_per_iteration} evaluations per iteration")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    files = RUN_FILES + (() if args.no_plots else (RUN_FIGURE,))
    _prepare_out(args.out, files, args.overwrite)
    for w in cfg.warnings:
        print(f"warning: {w}")
    _write(args.out / "config.json", cfg.dumps())

    def progress(report):
        b = report.best_so_far
        print(f"iter {report.iteration:4d}  evals {report.evaluations_this_iter:3d}  "
              f"best {b.fitness:.6g} at {cfg.space.as_dict(b.params)}")

    try:
        with build_objective(cfg.objective, cfg.space) as objective:
            trace = engine.run(
                cfg.space, cfg.ba, objective, workers=args.workers, snapshots=args.verbose >= 2,
                objective_id=cfg.objective.identifier, callback=progress if args.verbose else None,
            )
    except ObjectiveFailure as exc:
        if exc.trace is not None:
            _write(args.out / "trace.json", exc.trace.dumps())
            _write(args.out / "convergence.csv", exc.trace.to_csv())
        raise
    _write(args.out / "trace.json", trace.dumps())
    _write(args.out / "convergence.csv", trace.to_csv())
    if not args.no_plots:
        from .plotting import plot_convergence

        plot_convergence(trace, args.out / RUN_FIGURE)
    print(f"stop: {trace.stop_reason} after {trace.iterations} iterations, "
          f"{trace.total_evaluations} evaluations ({trace.distinct_evaluations} distinct)")
    print(format_best(cfg.space.names, trace.best))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load(args, experiment=True)
    files = BENCH_FILES + (() if args.no_plots else (BENCH_FIGURE,))
    _prepare_out(args.out, files, args.overwrite)
    for w in cfg.warnings:
        print(f"warning: {w}")
    _write(args.out / "config.json", cfg.dumps())

    def progress(i, records):
        ba = next(r for r in records if r.trial == i and r.method == "ba")
        print(f"trial {i:4d}  ba best {ba.best.fitness:.6g}  success={ba.success}")

    result = harness.compare(cfg.experiment, workers=args.workers,
                             on_trial=progress if args.verbose else None)
    _write(args.out / "trials.csv", result.trials_csv())
    _write(args.out / "summary.json", result.dumps_summary())
    if not args.no_plots:
        from .plotting import plot_comparison

        plot_comparison(result, args.out / BENCH_FIGURE)
    print(result.table())
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidConfig as exc:
        _err(exc)
        return EXIT_CONFIG
    except ObjectiveFailure as exc:
        _err(f"objective failure: {exc}")
        return EXIT_OBJECTIVE
    except FileNotFoundError as exc:
        if Path(exc.filename or "") == args.config:
            _err(f"cannot read config: {exc}")
            return EXIT_CONFIG
        _err(exc)
        return EXIT_IO
    except OSError as exc:
        _err(exc)
        return EXIT_IO
    except OptBAError as exc:
        _err(exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
