#!/usr/bin/env python3
"""
Example usage script for the Robust Tournament Designer.
Walks through the library API: solving, the adversarial noise, effort and inequality.
"""

import sys
import argparse
import subprocess
from pathlib import Path

import numpy as np

from robust_tournament.config import SolverConfig
from robust_tournament.design.solver import solve_robust
from robust_tournament.design.closed_form import solve_n3_closed_form, solve_n4_closed_form
from robust_tournament.design.asymptotics import asymptotic_gap, asymptotic_v
from robust_tournament.noise.adversary import adversarial_m, entropy_of
from robust_tournament.noise.reconstruction import reconstruct_distribution
from robust_tournament.equilibrium import PowerCost, equilibrium_effort
from robust_tournament.metrics import gini, lorenz_dominates


def show_usage():
    """Show CLI usage examples."""
    print("🏆 Robust Tournament Designer - Example Usage")
    print("=" * 50)

    print("\n1. Robust prizes for ten agents:")
    print("python3 main.py solve --n 10")

    print("\n2. Reproduce the prize table for n = 3..10:")
    print("python3 main.py table --min 3 --max 10 --output table.csv")

    print("\n3. Export the adversarial noise for n = 3:")
    print("python3 main.py distribution --n 3 --hbar 0 --source closed-form")

    print("\n4. Compare the solved schedule with the harmonic one:")
    print("python3 main.py asymptotic --n 50 --compare --format csv")

    print("\n5. Solve, then verify the saved report:")
    print("python3 main.py solve --n 10 --output solve_n10.json")
    print("python3 main.py verify --input solve_n10.json")

    print("\n💡 Tips:")
    print("- Use --verbose to see the solver phases on stderr")
    print("- Set ROBUST_TOURNAMENT_OUTPUT_DIR to collect files in one place")
    print("- Exit code 3 means the solver missed its KKT tolerance; the report is still written")


def run_library_tour(n: int, verbose: bool = False):
    """Solve for n and derive the quantities built on d*."""
    print(f"🚀 Library tour for n = {n}")
    print("=" * 50)

    cfg = SolverConfig()
    report = solve_robust(n, cfg)
    print(f"✅ Converged: {report.converged} (KKT residual {report.kkt_residual:.2e})")
    print(f"   v* = {np.round(report.v_star.tolist(), 4)}")
    print(f"   W(d*) = {report.objective:.6f}")
    if verbose:
        print(f"   phases: {report.diagnostics.get('phases')}")
        print(f"   slack on inactive ranks: {report.diagnostics.get('slack')}")

    if n in (3, 4):
        exact = solve_n3_closed_form() if n == 3 else solve_n4_closed_form(cfg.quadrature)
        gap = np.max(np.abs(np.asarray(exact.differentials) - np.asarray(report.d_star)))
        print(f"🧮 Closed form agrees to {gap:.1e}")

    m = adversarial_m(report.d_star, 0.0, cfg.quadrature)
    print(f"\n🎲 Adversarial noise: entropy {entropy_of(m, cfg.quadrature):.3e}, lambda {m.constant:.6f}")
    dist = reconstruct_distribution(m, 0.0, 401, cfg.quadrature)
    if dist.bounded:
        print(f"   support [{dist.support_lower:.4f}, {dist.support_upper:.4f}]")
    else:
        print("   support unbounded above")

    effort = equilibrium_effort(report.d_star, m, PowerCost(p=2.0, c0=1.0), cfg.quadrature)
    print(f"💪 Worst-case effort with quadratic cost: {effort:.6f}")

    harmonic = asymptotic_v(n)
    print(f"\n📊 Gini: robust {gini(report.v_star):.4f}, harmonic {gini(harmonic):.4f}")
    print(f"   robust schedule Lorenz-dominated by harmonic: {lorenz_dominates(report.v_star, harmonic)}")
    if n >= 3:
        print(f"   W(d*) - W(d^inf) = {asymptotic_gap(n, cfg):.3e}")
    return report.converged


def check_prerequisites():
    """Check if prerequisites are met."""
    print("\n🔍 Checking Prerequisites...")

    issues = []

    if sys.version_info < (3, 9):
        issues.append("Python 3.9+ required")
    else:
        print("✅ Python version OK")

    if not Path("requirements.txt").exists():
        issues.append("requirements.txt not found")
    else:
        print("✅ requirements.txt found")

    for package in ("numpy", "scipy", "pydantic", "rich", "dotenv"):
        try:
            __import__(package)
            print(f"✅ {package} available")
        except ImportError:
            issues.append(f"{package} not installed")

    if issues:
        print(f"\n❌ Issues found:")
        for issue in issues:
            print(f"   - {issue}")
        return False
    print("\n🎉 All prerequisites met!")
    return True


def run_cli_example(n: int, verbose: bool = False):
    """Run `main.py solve` for n through the CLI."""
    cmd = ["python3", "main.py", "solve", "--n", str(n)]
    if verbose:
        cmd.append("--verbose")
    print(f"Command: {' '.join(cmd)}")
    result = subprocess.run(cmd, check=False)
    if result.returncode == 0:
        print(f"\n✅ solve --n {n} completed successfully!")
        return True
    print(f"\n❌ solve --n {n} failed with exit code: {result.returncode}")
    return False


def main():
    """Main function."""
    parser = argparse.ArgumentParser(
        description="Robust Tournament Designer - Example Usage and Runner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python3 example_usage.py                 # Show CLI usage examples
  python3 example_usage.py --check         # Check prerequisites
  python3 example_usage.py --tour 7        # Walk through the library API for n = 7
  python3 example_usage.py --cli 10        # Run the CLI solve for n = 10
        """
    )

    parser.add_argument('--tour', type=int, metavar='N', help='Run the library tour for n agents')
    parser.add_argument('--cli', type=int, metavar='N', help='Run the CLI solve for n agents')
    parser.add_argument('--check', action='store_true', help='Check prerequisites')
    parser.add_argument('--verbose', action='store_true', help='Show solver diagnostics')

    args = parser.parse_args()

    if args.check:
        check_prerequisites()
    elif args.tour:
        sys.exit(0 if run_library_tour(args.tour, args.verbose) else 1)
    elif args.cli:
        sys.exit(0 if run_cli_example(args.cli, args.verbose) else 1)
    else:
        show_usage()
        print("\nOptions:")
        print("  --check       Check prerequisites")
        print("  --tour N      Library tour for n agents")
        print("  --cli N       CLI solve for n agents")


if __name__ == "__main__":
    main()
