#src/terminal/cli_interface.py
"""
The simulate, fit, bench and eval commands.

Each command returns a process exit status: 0 on success, 1 for invalid input
or any other toolkit error, 2 when the moment method fails in a structured
way (complex roots, degenerate moments, infeasible projection).
"""

import argparse
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np

from config.logging_config import get_logger
from config.run_config import RunConfig, load_run_config, resolve_threads
from config.settings import get_settings
from src.bench.methods import (
    STATUS_MOM_FAILURE,
    STATUS_OK,
    FitOptions,
    MethodOutcome,
    fit_method,
    resolve_sigma,
)
from src.bench.metrics import err_alpha, match_components
from src.bench.presets import load_preset
from src.bench.runner import RESULT_COLUMNS, run_benchmark
from src.bench.scenario import generate_scenario, parse_method
from src.core.exceptions import (
    ConfigurationException,
    InvalidInputException,
    MomFailureException,
    SoftmixException,
    handle_softmix_exception,
)
from src.core.utils.file_utils import (
    read_counts,
    read_features,
    read_params,
    write_counts,
    write_diag,
    write_features,
    write_moments,
    write_params,
    write_results,
    write_subspace,
    write_trace,
)
from src.estimation.model import MixtureParams
from src.estimation.subspace import estimate_gamma, top_eigenspace
from src.terminal.output_formatter import (
    print_bench_summary,
    print_errors,
    print_fit_summary,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_MOM_FAILURE = 2


def _output_dir(args: argparse.Namespace) -> Path:
    return Path(args.out or get_settings().output_dir)


def _load_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(args.config, overrides={"scenario": {"seed": args.seed}})


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write features.csv, truth.params and counts.csv for the configured scenario."""
    config = _load_config(args)
    scenario = config.to_scenario()
    data = generate_scenario(scenario)
    out = _output_dir(args)

    write_features(out / "features.csv", data.X)
    write_params(out / "truth.params", data.omega_star)
    write_counts(out / "counts.csv", data.counts)
    logger.info(f"simulated {scenario.scenario_id} into {out}")
    return EXIT_OK


def _fit_options(config: RunConfig, K: int, Sigma) -> FitOptions:
    return FitOptions(
        K=K,
        B=config.mom.B,
        em_config=config.to_em_config(),
        m_inits=config.scenario.m_inits,
        n_axis_candidates=config.subspace.n_axis_candidates,
        select_axis=config.subspace.select_axis,
        Sigma=Sigma,
        degree_cap=config.mom.degree_cap,
    )


def _resolve_k(config: RunConfig, *candidates: Optional[MixtureParams]) -> int:
    if config.scenario.K is not None:
        return config.scenario.K
    for omega in candidates:
        if omega is not None:
            return omega.K
    raise ConfigurationException(
        "K is required: set [scenario] K or pass a parameter file",
        section="scenario",
        key="K",
    )


def _diag_row(outcome: MethodOutcome) -> Dict:
    diagnostics = outcome.mom_diagnostics
    return {
        "method": outcome.method,
        "status": outcome.status,
        "iters": outcome.iters,
        "converged": outcome.converged,
        "loglik": outcome.loglik,
        "projection_iters": diagnostics.projection_iters,
        "min_hankel_eig": diagnostics.min_hankel_eig,
        "vandermonde_cond": diagnostics.vandermonde_cond,
        "alpha_floored": outcome.alpha_floored,
    }


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit the chosen method; write est.params, trace.csv and diag.csv."""
    config = _load_config(args)
    data_dir = Path(args.data)
    X = read_features(data_dir / "features.csv")
    counts = read_counts(data_dir / "counts.csv")
    truth_path = data_dir / "truth.params"
    truth = read_params(truth_path) if truth_path.exists() else None
    init = read_params(args.init) if args.init else None

    method = args.method
    if method != "EM":
        parse_method(method, config.scenario.m_inits)
    K = _resolve_k(config, init, truth)
    Sigma = resolve_sigma(config.subspace.sigma, X)
    options = _fit_options(config, K, Sigma)
    out = _output_dir(args)

    outcome = fit_method(
        method,
        counts,
        X,
        options,
        seed=config.scenario.seed,
        labels=("fit",),
        omega_star=init if init is not None else truth,
        init=init,
    )

    if outcome.omega_hat is not None:
        write_params(out / "est.params", outcome.omega_hat)
    write_trace(out / "trace.csv", outcome.loglik_trace)
    write_diag(out / "diag.csv", [_diag_row(outcome)])
    if outcome.mom is not None:
        write_moments(out / "moments.csv", outcome.mom.projected_moments)
    if method in ("MoM", "EM-MoM") or method.startswith("EM-dr-rand"):
        estimate = top_eigenspace(estimate_gamma(counts, X, Sigma), K)
        write_subspace(out / "subspace.csv", estimate)

    print_fit_summary(outcome)
    omega_hat = outcome.omega_hat
    if truth is not None and omega_hat is not None and truth.K == omega_hat.K:
        theta_error, perm = match_components(truth.thetas, outcome.omega_hat.thetas)
        print_errors(theta_error, err_alpha(truth.alpha, outcome.omega_hat.alpha, perm))

    if outcome.status == STATUS_MOM_FAILURE:
        logger.warning(f"MoM failed: {outcome.message}")
        return EXIT_MOM_FAILURE
    if outcome.status != STATUS_OK:
        logger.error(f"{outcome.method} did not produce an estimate: {outcome.message}")
        return EXIT_INVALID
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    """Run a preset or the configured scenario and write results.csv."""
    config = _load_config(args)
    if args.preset:
        seed = args.seed if args.seed is not None else config.scenario.seed
        preset = load_preset(args.preset, seed=seed, full=args.full)
        scenarios = list(preset.scenarios)
        replicates = preset.replicates
    else:
        scenarios = [config.to_scenario()]
        replicates = config.bench.replicates

    if args.method:
        methods = tuple(m.strip() for m in args.method.split(",") if m.strip())
        scenarios = [replace(sc, methods=methods) for sc in scenarios]

    threads = resolve_threads(args.threads, config.bench.threads)
    records = run_benchmark(
        scenarios,
        replicates,
        threads=threads,
        record_wall_time=config.bench.record_wall_time,
    )
    out = _output_dir(args)
    rows = (record.as_row() for record in records)
    write_results(out / "results.csv", RESULT_COLUMNS, rows)
    print_bench_summary(records)
    logger.info(f"wrote {len(records)} records to {out / 'results.csv'}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Print err_theta and err_alpha between two parameter files."""
    truth = read_params(args.truth)
    estimate = read_params(args.estimate)
    if truth.K != estimate.K or truth.L != estimate.L:
        raise InvalidInputException(
            f"shape mismatch: truth is {truth.K}x{truth.L}, "
            f"estimate is {estimate.K}x{estimate.L}",
            parameter="estimate",
        )
    theta_error, perm = match_components(truth.thetas, estimate.thetas)
    print_errors(theta_error, err_alpha(truth.alpha, estimate.alpha, perm))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "bench": cmd_bench,
    "eval": cmd_eval,
}


def run_command(args: argparse.Namespace) -> int:
    """Dispatch ``args.command`` and map toolkit errors to exit statuses."""
    try:
        with np.errstate(over="ignore", under="ignore"):
            return COMMANDS[args.command](args)
    except MomFailureException as exc:
        handle_softmix_exception(exc, logger, reraise=False)
        return EXIT_MOM_FAILURE
    except SoftmixException as exc:
        handle_softmix_exception(exc, logger, reraise=False)
        return EXIT_INVALID
