#src/bench/runner.py
"""
Benchmark orchestration.

A cell is one (scenario, replicate) pair: its data triple is drawn once and
every method of the scenario runs on it, so MoM and EM-MoM share a single
moment fit. Cells are independent and pure given their seeds, so they run
in worker processes; records come back in canonical order whatever the
worker count.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from config.logging_config import get_logger, log_bench_cell
from src.bench.methods import (
    STATUS_OK,
    FitOptions,
    MethodOutcome,
    fit_method,
    resolve_sigma,
    run_mom,
)
from src.bench.metrics import err_alpha, match_components
from src.bench.scenario import Scenario, ScenarioData, generate_scenario
from src.core.exceptions import InvalidInputException

logger = get_logger(__name__)

RESULT_COLUMNS = (
    "scenario_id",
    "K",
    "L",
    "p",
    "N",
    "seed",
    "method",
    "replicate",
    "err_theta",
    "err_alpha",
    "iters",
    "wall_ms",
    "status",
)


@dataclass(frozen=True)
class BenchRecord:
    scenario_id: str
    K: int
    L: int
    p: int
    N: int
    seed: int
    method: str
    replicate: int
    err_theta: float
    err_alpha: float
    iters: int
    wall_ms: float
    status: str

    def as_row(self) -> Tuple:
        return tuple(getattr(self, column) for column in RESULT_COLUMNS)


def scenario_options(sc: Scenario, data: ScenarioData) -> FitOptions:
    return FitOptions(
        K=sc.K,
        B=sc.B,
        em_config=sc.em_config,
        m_inits=sc.m_inits,
        n_axis_candidates=sc.n_axis_candidates,
        select_axis=sc.select_axis,
        Sigma=resolve_sigma(sc.sigma, data.X),
    )


def score_outcome(outcome: MethodOutcome, data: ScenarioData) -> Tuple[float, float]:
    """(Err_theta, Err_alpha) against the truth, NaN when there is no estimate."""
    if outcome.omega_hat is None:
        return math.nan, math.nan
    truth, estimate = data.omega_star, outcome.omega_hat
    theta_error, perm = match_components(truth.thetas, estimate.thetas)
    return theta_error, err_alpha(truth.alpha, estimate.alpha, perm)


def _record(
    sc: Scenario, data: ScenarioData, outcome: MethodOutcome, wall_ms: float
) -> BenchRecord:
    theta_error, alpha_error = score_outcome(outcome, data)
    return BenchRecord(
        scenario_id=sc.scenario_id,
        K=sc.K,
        L=sc.L,
        p=sc.p,
        N=sc.N,
        seed=sc.seed,
        method=outcome.method,
        replicate=data.replicate,
        err_theta=theta_error,
        err_alpha=alpha_error,
        iters=outcome.iters,
        wall_ms=wall_ms,
        status=outcome.status,
    )


def run_method(
    method: str,
    sc: Scenario,
    data: ScenarioData,
    mom_outcome: Optional[MethodOutcome] = None,
    record_wall_time: bool = False,
) -> BenchRecord:
    """Fit one method on one replicate's data and score it."""
    started = time.perf_counter()
    outcome = fit_method(
        method,
        data.counts,
        data.X,
        scenario_options(sc, data),
        seed=sc.seed,
        labels=("replicate", data.replicate),
        omega_star=data.omega_star,
        mom_outcome=mom_outcome,
    )
    elapsed = (time.perf_counter() - started) * 1000.0
    return _record(sc, data, outcome, round(elapsed, 3) if record_wall_time else 0.0)


def run_cell(
    sc: Scenario, replicate: int, record_wall_time: bool = False
) -> List[BenchRecord]:
    """
    Every method of ``sc`` on replicate ``replicate``.

    Args:
        sc: Scenario to draw the data from.
        replicate: Replicate index; selects the data substreams.
        record_wall_time: Keep per-method wall times instead of 0.0.

    Returns:
        One BenchRecord per method, in the scenario's method order.
    """
    data = generate_scenario(sc, replicate)
    specs = sc.method_specs
    mom_outcome = None
    if any(spec.family in ("MoM", "EM-MoM") for spec in specs):
        mom_outcome = run_mom(
            data.counts,
            data.X,
            scenario_options(sc, data),
            sc.seed,
            ("replicate", replicate),
        )

    records = [
        run_method(spec.name, sc, data, mom_outcome, record_wall_time) for spec in specs
    ]
    for record in records:
        if record.status != STATUS_OK:
            logger.warning(
                f"{sc.scenario_id} replicate {replicate}: "
                f"{record.method} recorded as {record.status}"
            )
    log_bench_cell(
        sc.scenario_id,
        replicate,
        **{record.method: f"{record.err_theta:.4g}" for record in records},
    )
    return records


def _run_cell_task(task: Tuple[Scenario, int, bool]) -> List[BenchRecord]:
    """Top-level picklable worker for the process pool."""
    sc, replicate, record_wall_time = task
    return run_cell(sc, replicate, record_wall_time)


def run_benchmark(
    scenarios: Sequence[Scenario],
    replicates: int,
    threads: int = 1,
    record_wall_time: bool = False,
) -> List[BenchRecord]:
    """
    All (scenario x method x replicate) records in canonical order.

    Args:
        scenarios: Scenarios to run; those without methods are skipped.
        replicates: Replicates per scenario.
        threads: Worker processes; 1 runs the cells in this process.
        record_wall_time: Keep per-method wall times instead of 0.0.

    Returns:
        Records sorted by (scenario, method, replicate).
    """
    if int(replicates) < 1:
        raise InvalidInputException("replicates must be >= 1", parameter="replicates")
    if int(threads) < 1:
        raise InvalidInputException("threads must be >= 1", parameter="threads")

    cells = [
        (s_index, sc, replicate)
        for s_index, sc in enumerate(scenarios)
        if sc.methods
        for replicate in range(int(replicates))
    ]
    workers = max(1, min(int(threads), len(cells)))
    logger.info(
        f"running {len(cells)} cells over {len(scenarios)} scenarios "
        f"on {workers} worker(s)"
    )

    tasks = [(sc, replicate, record_wall_time) for _, sc, replicate in cells]
    if workers == 1:
        results = [_run_cell_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_task, tasks))

    keyed = []
    for (s_index, sc, replicate), records in zip(cells, results):
        for m_index, record in enumerate(records):
            keyed.append(((s_index, m_index, replicate), record))
    keyed.sort(key=lambda item: item[0])
    return [record for _, record in keyed]
