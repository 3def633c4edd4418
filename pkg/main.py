#!/usr/bin/env python3
"""
Hierarchical Data Assimilation CLI - Main Entry Point

Command-line driver for synthetic twin experiments: generate a truth bundle,
run a sampler against it, and compare runs with a reference posterior.

Usage:
    python main.py gen-truth --config desk_twin_tm1 --out runs/tm1/truth
    python main.py run --config desk_twin_tm1 --method smcabc --truth runs/tm1/truth --out runs/tm1/smc
    python main.py diag runs/tm1/smc runs/tm1/hier --reference runs/tm1/rs --out runs/tm1/diag
    python main.py --log-level DEBUG run ...

Exit codes:
    0 success, 2 usage or configuration error, 3 budget exhausted with
    partial results, 4 numerical failure.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src.config import load_config, settings
from src.core import METHODS, ExperimentRunner
from src.utils.errors import BudgetExhausted, ConfigError, HdaError, NumericalError, UsageError
from src.utils.logger import set_level, setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4


class _Parser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="main.py", description="Hierarchical data assimilation twin experiments")
    parser.add_argument("--log-level", type=str.upper, choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen-truth", help="generate the synthetic truth bundle")
    gen.add_argument("--config", required=True, help="experiment JSON (path or name in configs/)")
    gen.add_argument("--seed", type=int, help="override the master seed")
    gen.add_argument("--out", help="truth bundle directory")

    run = sub.add_parser("run", help="run one sampler against a truth bundle")
    run.add_argument("--config", required=True, help="experiment JSON (path or name in configs/)")
    run.add_argument("--method", required=True, help=f"one of: {', '.join(METHODS)}")
    run.add_argument("--truth", required=True, help="truth bundle directory")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--workers", type=int, help="forward-evaluation pool size")
    run.add_argument("--out", help="run directory")
    run.add_argument("--strict", action="store_true", help="treat budget exhaustion as an error")

    diag = sub.add_parser("diag", help="compare run directories with a reference run")
    diag.add_argument("runs", nargs="+", help="run directories")
    diag.add_argument("--reference", help="reference run directory (e.g. a large rs run)")
    diag.add_argument("--bins", type=int, help="histogram bins per parameter")
    diag.add_argument("--out", required=True, help="diagnostics directory")
    return parser


def _load(args) -> "ExperimentRunner":
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    workers = getattr(args, "workers", None)
    if workers is not None and workers < 1:
        raise UsageError(f"--workers must be >= 1, got {workers}")
    return ExperimentRunner(config, workers=workers)


def cmd_gen_truth(args) -> int:
    runner = _load(args)
    out = Path(args.out) if args.out else runner.config.output_dir / "truth"
    bundle = runner.gen_truth(out)
    print(f"Truth bundle written to {bundle.directory} (truth_id {bundle.truth_id[:12]})")
    return EXIT_OK


def cmd_run(args) -> int:
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}, expected one of {', '.join(METHODS)}")
    runner = _load(args)
    out = Path(args.out) if args.out else runner.config.output_dir / args.method
    summary = runner.run(args.method, args.truth, out, strict=args.strict)
    print(
        f"{summary.method}: {summary.forward_runs} forward runs"
        f" (+{summary.forecast_runs} forecast) -> {summary.directory}"
    )
    if summary.budget_exhausted:
        print(f"⚠️  Budget exhausted; partial results kept in {summary.directory}")
        return EXIT_BUDGET
    return EXIT_OK


def cmd_diag(args) -> int:
    if args.reference is None:
        raise UsageError("diag needs --reference")
    out = ExperimentRunner.diag(args.runs, args.reference, args.out, bins=args.bins)
    print(f"Diagnostics written to {out}")
    return EXIT_OK


COMMANDS = {
    "gen-truth": cmd_gen_truth,
    "run": cmd_run,
    "diag": cmd_diag,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI application. Returns the process exit code."""
    if not settings.validate():
        logger.error("Invalid runtime settings (check HDA_WORKERS and cache limits)")
        print("\n❌ Error: invalid runtime settings (check HDA_* environment variables)\n")
        return EXIT_USAGE

    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            set_level(args.log_level)
        return COMMANDS[args.command](args)

    except (UsageError, ConfigError) as e:
        logger.error(f"Usage error: {e}")
        print(f"\n❌ Error: {e}\n")
        return EXIT_USAGE
    except BudgetExhausted as e:
        logger.error(f"Budget exhausted: {e}")
        print(f"\n❌ Budget exhausted: {e}\n")
        return EXIT_BUDGET
    except NumericalError as e:
        logger.error(f"Numerical failure ({type(e).__name__}): {e}")
        print(f"\n❌ Numerical failure ({type(e).__name__}): {e}\n")
        return EXIT_NUMERICAL
    except HdaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"\n❌ Error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
