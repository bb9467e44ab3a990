#src/terminal/output_formatter.py
"""Console rendering of command results."""

import math
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from src.bench.methods import MethodOutcome
from src.bench.runner import BenchRecord
from src.core.utils.file_utils import fmt


def _console() -> Console:
    return Console(highlight=False, soft_wrap=True)


def format_errors(err_theta: float, err_alpha: float) -> str:
    return f"err_theta={fmt(float(err_theta))} err_alpha={fmt(float(err_alpha))}"


def print_errors(err_theta: float, err_alpha: float) -> None:
    _console().print(format_errors(err_theta, err_alpha), markup=False)


def print_fit_summary(outcome: MethodOutcome) -> None:
    table = Table(title=f"{outcome.method} fit", show_header=False)
    table.add_column("field", style="cyan")
    table.add_column("value")
    table.add_row("status", outcome.status)
    table.add_row("iterations", str(outcome.iters))
    table.add_row("converged", str(outcome.converged))
    if not math.isnan(outcome.loglik):
        table.add_row("log-likelihood", f"{outcome.loglik:.8f}")
    if outcome.omega_hat is not None:
        table.add_row("alpha", np.array2string(outcome.omega_hat.alpha, precision=4))
    if outcome.message:
        table.add_row("message", outcome.message)
    _console().print(table)


SummaryRow = Tuple[str, str, float, float, int]


def summarize_records(records: Sequence[BenchRecord]) -> List[SummaryRow]:
    """(scenario, method, median errors, failures) rows in first-seen order."""
    groups: Dict[Tuple[str, str], List[BenchRecord]] = defaultdict(list)
    for record in records:
        groups[(record.scenario_id, record.method)].append(record)
    rows = []
    for (scenario_id, method), group in groups.items():
        thetas = [r.err_theta for r in group if not math.isnan(r.err_theta)]
        alphas = [r.err_alpha for r in group if not math.isnan(r.err_alpha)]
        failures = sum(r.status != "ok" for r in group)
        rows.append(
            (
                scenario_id,
                method,
                float(np.median(thetas)) if thetas else math.nan,
                float(np.median(alphas)) if alphas else math.nan,
                failures,
            )
        )
    return rows


def print_bench_summary(records: Sequence[BenchRecord]) -> None:
    table = Table(title="Benchmark medians")
    table.add_column("scenario", style="cyan")
    table.add_column("method", style="magenta")
    table.add_column("Err_theta", justify="right")
    table.add_column("Err_alpha", justify="right")
    table.add_column("failures", justify="right")
    for scenario_id, method, theta, alpha, failures in summarize_records(records):
        table.add_row(
            scenario_id, method, f"{theta:.4g}", f"{alpha:.4g}", str(failures)
        )
    _console().print(table)
