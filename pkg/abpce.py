"""
abpce | Active bootstrap-PCE reliability analysis

Commands:
- validate <config>                 check a run configuration
- run <config> [--seed] [--out]     run an analysis, write CSV + JSON artifacts
- benchmark <name> [--reference]    canned reproduction (four_branch, truss,
                                    linear_oracle, sinc_1d)

Exit status: 0 converged, 2 budget exhausted, 1 error.
"""

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

# Setup paths
CURRENT_DIR = os.path.dirname(os.path.abspath(__file__))
if CURRENT_DIR not in sys.path:
    sys.path.insert(0, CURRENT_DIR)

from modules import __version__
from modules.adapter import RunAdapter
from modules.benchmarks import available, get_benchmark, sinc_1d_demo
from modules.engine import evaluate_model, mcs_pf, run_abpce
from modules.errors import AbpceError, ConfigError
from modules.models import RunConfig, RunReport
from modules.report import HistoryWriter, write_band_demo, write_run
from modules.validation import validate_config

logger = logging.getLogger("abpce")

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2


def configure_logging(verbose: int):
    level = logging.WARNING if verbose < 0 else logging.INFO if verbose == 0 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def execute(run: RunConfig, out_dir: Path, reference: bool = False) -> RunReport:
    """Run the analysis described by a validated configuration and write its artifacts"""
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = RunAdapter.engine_inputs(run)
    fingerprint = RunAdapter.run_fingerprint(run)
    logger.info("Run %s -> %s", fingerprint[:12], out_dir)

    started = time.perf_counter()
    result = run_abpce(on_iteration=HistoryWriter(out_dir / "history.csv"), **inputs)
    elapsed = time.perf_counter() - started
    logger.info("Analysis finished in %.1fs", elapsed)

    reference_pf = None
    relative_error = None
    if reference:
        limit_state = inputs['limit_state']
        reference_pf = mcs_pf(limit_state.to_g(evaluate_model(limit_state, result.pool.physical)))
        if reference_pf > 0:
            relative_error = abs(result.pf_hat - reference_pf) / reference_pf
        logger.info("Exact-model MCS on the pool: pf=%.4e (surrogate deviation %s)",
                    reference_pf, f"{relative_error:.2%}" if relative_error is not None else "n/a")

    report = RunReport(
        version=__version__,
        fingerprint=fingerprint,
        config=run.model_dump(mode="json"),
        result=result,
        timing_seconds=elapsed,
        reference_pf=reference_pf,
        reference_relative_error=relative_error,
    )
    write_run(out_dir, result, report, names=inputs['rv'].names, history_written=True)
    return report


def cmd_validate(args) -> int:
    try:
        run, warnings = validate_config(args.config)
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            print(f"error: {diagnostic}", file=sys.stderr)
        return EXIT_ERROR
    for warning in warnings:
        print(f"warning: {warning}")
    print(f"{args.config}: OK (seed {run.seed}, output '{run.output}')")
    return EXIT_CONVERGED


def cmd_run(args) -> int:
    try:
        run, _ = validate_config(args.config)
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            print(f"error: {diagnostic}", file=sys.stderr)
        return EXIT_ERROR

    updates = {}
    if args.seed is not None:
        updates['seed'] = args.seed
    if args.out is not None:
        updates['output'] = args.out
    run = run.model_copy(update=updates)
    return _finish(run, Path(run.output), reference=False)


def cmd_benchmark(args) -> int:
    out_dir = Path(args.out or f"abpce_{args.name}")
    if args.name == "sinc_1d":
        write_band_demo(sinc_1d_demo(seed=args.seed), out_dir)
        print(f"sinc_1d band demo written to {out_dir}")
        return EXIT_CONVERGED

    try:
        spec = get_benchmark(args.name)
        run = RunAdapter.benchmark_config(spec, seed=args.seed, output=str(out_dir), n_mcs=args.n_mcs)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return _finish(run, out_dir, reference=args.reference)


def _finish(run: RunConfig, out_dir: Path, reference: bool) -> int:
    try:
        report = execute(run, out_dir, reference=reference)
    except (AbpceError, ValueError) as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    result = report.result
    print(f"pf = {result.pf_hat:.4e}  [{result.pf_minus:.4e}, {result.pf_plus:.4e}]  "
          f"beta = {result.beta:.3f}  N_total = {result.n_total}  "
          f"{'converged' if result.converged else 'budget exhausted'}")
    if report.reference_pf is not None:
        print(f"reference pf on the same pool = {report.reference_pf:.4e}")
    for diagnostic in result.diagnostics:
        print(f"note: {diagnostic}")
    return EXIT_CONVERGED if result.converged else EXIT_BUDGET


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abpce", description="Active bootstrap-PCE reliability analysis")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v debug output")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a run configuration")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run an analysis from a configuration file")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("benchmark", help="run a built-in reproduction")
    p.add_argument("name", choices=available())
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--n-mcs", type=int, default=None, help="candidate pool size")
    p.add_argument("--reference", action="store_true",
                   help="also run the exact model on the whole pool")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(-1 if args.quiet else args.verbose)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
