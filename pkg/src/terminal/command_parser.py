#src/terminal/command_parser.py
"""
Argument parsing for the ``softmix`` command.
Usage errors exit with status 64 instead of argparse's default 2, which the
fit command reserves for MoM failures.
"""

import argparse
import sys
from typing import NoReturn

from src.bench.presets import preset_names

EXIT_USAGE = 64


class SoftmixArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=str,
        help="INI run file ([scenario], [em], [mom], [subspace], [bench])",
    )
    common.add_argument("--seed", type=int, help="Seed overriding [scenario] seed")
    common.add_argument(
        "--out",
        type=str,
        help="Output directory (default: SOFTMIX_OUTPUT_DIR or ./results)",
    )
    common.add_argument(
        "--verbose", "-v", action="store_true", help="Enable debug logging"
    )
    return common


def create_arg_parser() -> argparse.ArgumentParser:
    """Create command line argument parser."""
    common = _common_options()
    parser = SoftmixArgumentParser(
        prog="softmix",
        description="Softmax mixture estimation: hybrid EM, method of moments "
        "and benchmarks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  softmix simulate --config config/run_defaults.ini --out data
  softmix fit --data data --method EM-MoM --config config/run_defaults.ini --out fit
  softmix bench --preset paper-small --threads 4 --out bench
  softmix eval data/truth.params fit/est.params
        """,
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    commands.add_parser(
        "simulate",
        parents=[common],
        help="Draw features, true parameters and counts for one scenario",
    )

    fit = commands.add_parser(
        "fit", parents=[common], help="Estimate a mixture from features and counts"
    )
    fit.add_argument(
        "--data",
        type=str,
        default=".",
        help="Directory holding features.csv and counts.csv",
    )
    fit.add_argument(
        "--method",
        type=str,
        default="EM-MoM",
        help="MoM, EM-MoM, EM-oracle, EM-dr-rand-<m>, EM-rand-<m> or EM (with --init)",
    )
    fit.add_argument(
        "--init", type=str, help="Parameter file to start EM (or EM-oracle) from"
    )

    bench = commands.add_parser(
        "bench", parents=[common], help="Run a simulation benchmark"
    )
    bench.add_argument(
        "--preset", type=str, choices=preset_names(), help="Named scenario grid"
    )
    bench.add_argument(
        "--full", action="store_true", help="Use the preset's full published grid"
    )
    bench.add_argument(
        "--method",
        type=str,
        help="Comma-separated methods overriding the scenario list",
    )
    bench.add_argument(
        "--threads",
        type=int,
        help="Worker processes (default: SOFTMIX_THREADS or all cores)",
    )

    evaluate = commands.add_parser(
        "eval", help="Compare an estimate with the true parameters"
    )
    evaluate.add_argument("truth", type=str, help="True parameter file")
    evaluate.add_argument("estimate", type=str, help="Estimated parameter file")
    evaluate.add_argument(
        "--verbose", "-v", action="store_true", help="Enable debug logging"
    )

    return parser
