#src/bench/presets.py
"""
Named scenario grids.

Each preset has a scaled-down default, sized for a workstation, and the
published full grid (``full=True``) with 200 replicates.
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Tuple

from src.bench.scenario import Scenario
from src.core.exceptions import InvalidInputException

ALL_METHODS = ("MoM", "EM-MoM", "EM-dr-rand-10", "EM-oracle")
RAND_INIT_METHODS = (
    "EM-dr-rand-1",
    "EM-dr-rand-10",
    "EM-dr-rand-100",
    "EM-rand-1",
    "EM-rand-10",
    "EM-rand-100",
    "EM-oracle",
)
PARAMETRIC_METHODS = ("MoM", "EM-MoM", "EM-oracle")


@dataclass(frozen=True)
class Preset:
    name: str
    scenarios: Tuple[Scenario, ...]
    replicates: int


def _grid(base: Scenario, field_name: str, values) -> Tuple[Scenario, ...]:
    return tuple(replace(base, **{field_name: value}) for value in values)


def _small_grid(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(K=3, L=50, p=7000, N=10000, seed=seed, methods=ALL_METHODS)
        return Preset("paper-small", (base,), replicates=200)
    base = Scenario(
        K=2, L=6, p=200, N=2000, seed=seed, methods=ALL_METHODS, n_axis_candidates=20
    )
    return Preset("paper-small", (base,), replicates=2)


def _errors_n(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(K=3, L=50, p=5000, N=2000, seed=seed, methods=ALL_METHODS)
        grid = _grid(base, "N", [2000, 4000, 6000, 8000, 10000])
        return Preset("figure-errors-N", grid, 200)
    base = Scenario(
        K=3, L=20, p=1000, N=2000, seed=seed, methods=ALL_METHODS, n_axis_candidates=50
    )
    return Preset("figure-errors-N", _grid(base, "N", [2000, 6000, 10000]), 10)


def _errors_p(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(K=3, L=50, p=1000, N=7000, seed=seed, methods=ALL_METHODS)
        grid = _grid(base, "p", [1000, 3000, 5000, 7000, 10000])
        return Preset("figure-errors-p", grid, 200)
    base = Scenario(
        K=3, L=20, p=1000, N=7000, seed=seed, methods=ALL_METHODS, n_axis_candidates=50
    )
    return Preset("figure-errors-p", _grid(base, "p", [1000, 3000, 5000]), 10)


def _errors_l(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(K=3, L=20, p=7000, N=10000, seed=seed, methods=ALL_METHODS)
        return Preset("figure-errors-L", _grid(base, "L", [20, 40, 60, 80, 100]), 200)
    base = Scenario(
        K=3, L=10, p=2000, N=10000, seed=seed, methods=ALL_METHODS, n_axis_candidates=50
    )
    return Preset("figure-errors-L", _grid(base, "L", [10, 20, 40]), 10)


def _errors_k(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(K=2, L=50, p=7000, N=10000, seed=seed, methods=ALL_METHODS)
        return Preset("figure-errors-K", _grid(base, "K", [2, 4, 6, 8, 10]), 200)
    base = Scenario(
        K=2, L=20, p=2000, N=10000, seed=seed, methods=ALL_METHODS, n_axis_candidates=50
    )
    return Preset("figure-errors-K", _grid(base, "K", [2, 4, 6]), 10)


def _rand_init(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(
            K=3, L=20, p=7000, N=10000, seed=seed, methods=RAND_INIT_METHODS
        )
        return Preset("figure-rand-init", _grid(base, "L", [20, 40, 60, 80, 100]), 200)
    # m in {1, 10} only
    methods = RAND_INIT_METHODS[:2] + RAND_INIT_METHODS[3:5]
    base = Scenario(K=3, L=10, p=1000, N=5000, seed=seed, methods=methods)
    return Preset("figure-rand-init", _grid(base, "L", [10, 20]), 10)


def _parametric_mom(seed: int, full: bool) -> Preset:
    if full:
        base = Scenario(
            K=2, L=50, p=1000, N=1000, seed=seed, methods=PARAMETRIC_METHODS
        )
        sizes = [1000, 3000, 5000, 7000, 9000, 12000, 15000]
        scenarios = tuple(replace(base, p=n, N=n) for n in sizes)
        return Preset("parametric-mom", scenarios, replicates=200)
    base = Scenario(
        K=2,
        L=20,
        p=1000,
        N=1000,
        seed=seed,
        methods=PARAMETRIC_METHODS,
        n_axis_candidates=50,
    )
    scenarios = tuple(replace(base, p=n, N=n) for n in (1000, 5000, 9000))
    return Preset("parametric-mom", scenarios, replicates=10)


PRESETS: Dict[str, Callable[[int, bool], Preset]] = {
    "paper-small": _small_grid,
    "figure-errors-N": _errors_n,
    "figure-errors-p": _errors_p,
    "figure-errors-L": _errors_l,
    "figure-errors-K": _errors_k,
    "figure-rand-init": _rand_init,
    "parametric-mom": _parametric_mom,
}


def preset_names() -> List[str]:
    return sorted(PRESETS)


def load_preset(name: str, seed: int = 20240101, full: bool = False) -> Preset:
    """
    Build a named scenario grid.

    Args:
        name: One of ``preset_names()``.
        seed: Base seed shared by every scenario of the grid.
        full: Use the published grid with 200 replicates.

    Returns:
        Preset: The scenarios and their replicate count.
    """
    try:
        builder = PRESETS[name]
    except KeyError:
        raise InvalidInputException(
            f"unknown preset {name!r}; choose from {', '.join(preset_names())}",
            parameter="preset",
        ) from None
    return builder(int(seed), full)
