#!/usr/bin/env python3
"""
Main CLI interface for the Robust Tournament Designer.

Computes prize schedules that maximize worst-case equilibrium effort under an
entropy bound on the noise, and exports the adversarial noise, asymptotics and
inequality sweeps as JSON or CSV.
"""

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from robust_tournament import __version__
from robust_tournament.config import QuadratureSpec, RunConfig, SolverConfig
from robust_tournament.utils.serialization import dumps_csv, dumps_json, write_text
from robust_tournament.workflow import EXIT_INVALID, TournamentWorkflow, WorkflowResult

OUTPUT_DIR_ENV = "ROBUST_TOURNAMENT_OUTPUT_DIR"
COMMANDS = ("solve", "table", "distribution", "asymptotic", "gini-sweep", "effort", "verify")

console = Console(stderr=True)


def create_parser() -> argparse.ArgumentParser:
    """Create command line argument parser."""

    parser = argparse.ArgumentParser(
        description="Design rank-order tournament prizes that are robust to unknown noise",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s solve --n 10
  %(prog)s table --min 3 --max 10 --output table.csv
  %(prog)s distribution --n 3 --hbar 0 --source closed-form
  %(prog)s asymptotic --n 50 --compare --format csv
  %(prog)s effort --n 3 --p 2 --c0 1
  %(prog)s verify --input solve_n10.json

Set ROBUST_TOURNAMENT_OUTPUT_DIR (or put it in .env) to write files instead of stdout.
        """
    )

    parser.add_argument("command", choices=COMMANDS, help="What to compute")

    parser.add_argument("--n", type=int, help="Number of agents")
    parser.add_argument("--min", dest="n_min", type=int, help="Smallest n for table and gini-sweep")
    parser.add_argument("--max", dest="n_max", type=int, help="Largest n for table and gini-sweep")

    noise = parser.add_argument_group("noise")
    noise.add_argument("--hbar", type=float, default=0.0, help="Entropy bound in nats (default: 0)")
    noise.add_argument("--eps-lower", type=float, default=0.0, help="Lower end of the noise support (default: 0)")
    noise.add_argument("--grid", type=int, default=2001, help="Quantile grid points (default: 2001)")
    noise.add_argument(
        "--source",
        choices=("solved", "asymptotic", "closed-form"),
        default="solved",
        help="Prize vector behind the distribution (default: solved)"
    )

    effort = parser.add_argument_group("effort")
    effort.add_argument("--p", type=float, default=2.0, help="Cost exponent, c(x) = c0 x^p / p (default: 2)")
    effort.add_argument("--c0", type=float, default=1.0, help="Cost scale (default: 1)")

    solver = parser.add_argument_group("solver")
    solver.add_argument("--kkt-tol", type=float, default=1e-8, help="KKT residual tolerance (default: 1e-8)")
    solver.add_argument("--zero-threshold", type=float, default=1e-9, help="Inactive-rank threshold (default: 1e-9)")
    solver.add_argument("--max-iterations", type=int, default=10000, help="Solver iteration budget (default: 10000)")
    solver.add_argument("--order", type=int, default=32, help="Gauss-Legendre nodes per panel (default: 32)")
    solver.add_argument("--panels", type=int, default=16, help="Quadrature panels (default: 16)")
    solver.add_argument("--refine-tol", type=float, default=1e-10, help="Panel-doubling tolerance (default: 1e-10)")

    verify = parser.add_argument_group("verify")
    verify.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    verify.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples (default: 200000)")
    verify.add_argument("--input", help="Solve JSON report to verify instead of solving")
    parser.add_argument("--compare", action="store_true", help="asymptotic: also solve and emit v* next to v^inf")

    parser.add_argument("--format", dest="output_format", choices=("json", "csv"), help="Output format")
    parser.add_argument("--output", help="Output file (default: stdout or $ROBUST_TOURNAMENT_OUTPUT_DIR)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging on stderr")
    parser.add_argument("--version", action="version", version=f"Robust Tournament Designer {__version__}")

    return parser


def validate_arguments(args) -> tuple[bool, Optional[str]]:
    """Validate command line arguments the config models cannot see."""

    for name in ("hbar", "eps_lower", "p", "c0", "kkt_tol", "zero_threshold", "refine_tol"):
        if not math.isfinite(getattr(args, name)):
            return False, f"--{name.replace('_', '-')} must be finite"

    if args.input is not None:
        input_path = Path(args.input)
        if not input_path.is_file():
            return False, f"Input file not found: {args.input}"

    if args.command in ("table", "gini-sweep") and args.n is not None:
        return False, f"{args.command} takes --min and --max, not --n"

    return True, None


def build_config(args) -> RunConfig:
    """RunConfig from parsed arguments; raises pydantic ValidationError."""
    quadrature = QuadratureSpec(order=args.order, panels=args.panels, refine_tol=args.refine_tol)
    solver = SolverConfig(
        kkt_tol=args.kkt_tol,
        zero_threshold=args.zero_threshold,
        max_iterations=args.max_iterations,
        quadrature=quadrature,
    )
    return RunConfig(
        command=args.command,
        n=args.n,
        n_min=args.n_min,
        n_max=args.n_max,
        hbar=args.hbar,
        eps_lower=args.eps_lower,
        grid=args.grid,
        source=args.source,
        p=args.p,
        c0=args.c0,
        seed=args.seed,
        samples=args.samples,
        compare=args.compare,
        output_format=args.output_format,
        output=args.output,
        input=args.input,
        solver=solver,
    )


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=verbose, show_path=verbose)],
        force=True,
    )


def output_path(config: RunConfig, extension: str) -> Optional[Path]:
    """--output, else a file under $ROBUST_TOURNAMENT_OUTPUT_DIR, else None for stdout."""
    if config.output:
        return Path(config.output)
    directory = os.getenv(OUTPUT_DIR_ENV)
    if not directory:
        return None
    if config.n is not None:
        stem = f"{config.command}_n{config.n}"
    elif config.n_min is not None:
        stem = f"{config.command}_n{config.n_min}-{config.n_max}"
    else:
        stem = config.command
    return Path(directory) / f"{stem}.{extension}"


def emit(config: RunConfig, result: WorkflowResult) -> None:
    """Write the payload to its destination; the distribution sidecar goes next to the CSV."""
    csv_output = config.resolved_format == "csv" and result.tabular
    if csv_output:
        text = dumps_csv(result.columns, result.rows)
    elif result.payload is not None:
        text = dumps_json(result.payload)
    else:
        return

    path = write_text(text, output_path(config, "csv" if csv_output else "json"))
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        console.print(f"📄 Wrote {path}")

    if csv_output and result.sidecar is not None:
        sidecar_text = dumps_json(result.sidecar)
        if path is None:
            console.print(sidecar_text, end="", markup=False, highlight=False, soft_wrap=True)
        else:
            sidecar_path = write_text(sidecar_text, path.with_suffix(".json"))
            console.print(f"📄 Wrote {sidecar_path}")


def run_command(config: RunConfig, verbose: bool = False) -> int:
    """Run one command and emit its output; returns the exit code."""
    workflow = TournamentWorkflow(config, verbose=verbose)
    result = workflow.run()

    emit(config, result)

    if verbose:
        for message in result.messages:
            console.print(f"🔍 {message}")
    if result.success:
        console.print(f"✅ {config.command} finished", style="green")
    else:
        console.print(f"❌ {config.command} failed: {result.error}", style="red", markup=False)
    return result.exit_code


def main():
    """Main entry point."""

    load_dotenv()
    parser = create_parser()

    if len(sys.argv) == 1:
        parser.print_help()
        sys.exit(EXIT_INVALID)

    args = parser.parse_args()
    configure_logging(args.verbose)

    valid, error_msg = validate_arguments(args)
    if not valid:
        console.print(f"❌ Error: {error_msg}", style="red", markup=False)
        sys.exit(EXIT_INVALID)

    try:
        config = build_config(args)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "arguments"
            console.print(f"❌ Invalid {location}: {error['msg']}", style="red", markup=False)
        sys.exit(EXIT_INVALID)

    try:
        sys.exit(run_command(config, args.verbose))

    except KeyboardInterrupt:
        console.print("\n⚠️  Process interrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()
