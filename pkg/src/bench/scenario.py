#src/bench/scenario.py
"""
Simulation scenarios.

Each replicate redraws the support points, the atoms and the sample from
labeled substreams of the scenario seed, so replicate r of a scenario is the
same data no matter which worker runs it or which other cells ran before.
"""

import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.core.exceptions import InvalidInputException
from src.core.utils.rng import substream
from src.estimation.em import EmConfig
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts, sample

METHOD_PATTERN = re.compile(r"^EM-(dr-rand|rand)(?:-(\d+|m))?$")
FIXED_METHODS = ("MoM", "EM-MoM", "EM-oracle")


@dataclass(frozen=True)
class MethodSpec:
    """A parsed method name; ``n_inits`` is None for the non-random methods."""

    name: str
    family: str
    n_inits: Optional[int] = None

    @property
    def init_mode(self) -> Optional[str]:
        return {"EM-dr-rand": "dr", "EM-rand": "rand"}.get(self.family)

    @property
    def needs_subspace(self) -> bool:
        return self.family in ("MoM", "EM-MoM", "EM-dr-rand")


def parse_method(name: str, m_inits: int = 10) -> MethodSpec:
    """Parse MoM, EM-MoM, EM-oracle, EM-dr-rand[-m|-<n>] and EM-rand[-m|-<n>]."""
    name = name.strip()
    if name in FIXED_METHODS:
        return MethodSpec(name=name, family=name)
    match = METHOD_PATTERN.match(name)
    if not match:
        raise InvalidInputException(f"unknown method {name!r}", parameter="method")
    family = f"EM-{match.group(1)}"
    count = match.group(2)
    n_inits = int(m_inits) if count in (None, "m") else int(count)
    if n_inits < 1:
        raise InvalidInputException(
            "number of initializations must be >= 1", parameter="method"
        )
    return MethodSpec(name=name, family=family, n_inits=n_inits)


@dataclass(frozen=True)
class Scenario:
    K: int
    L: int
    p: int
    N: int
    seed: int
    methods: Tuple[str, ...] = ("MoM", "EM-MoM", "EM-dr-rand-10", "EM-oracle")
    m_inits: int = 10
    em_config: EmConfig = field(default_factory=EmConfig)
    B: float = 1.0
    n_axis_candidates: int = 200
    select_axis: bool = True
    sigma: str = "identity"

    def __post_init__(self) -> None:
        for name in ("K", "L", "p", "N"):
            if int(getattr(self, name)) < 1:
                raise InvalidInputException(f"{name} must be >= 1", parameter=name)
        if self.p < 2:
            raise InvalidInputException("p must be >= 2", parameter="p")
        if self.K > self.L:
            raise InvalidInputException(
                f"K={self.K} exceeds L={self.L}: orthonormal atoms are unavailable",
                parameter="K",
            )
        if not self.B > 0:
            raise InvalidInputException("B must be positive", parameter="B")
        object.__setattr__(self, "methods", tuple(self.methods))
        for method in self.methods:
            parse_method(method, self.m_inits)

    @property
    def scenario_id(self) -> str:
        return f"K{self.K}-L{self.L}-p{self.p}-N{self.N}"

    @property
    def method_specs(self) -> Tuple[MethodSpec, ...]:
        return tuple(parse_method(method, self.m_inits) for method in self.methods)


@dataclass(frozen=True)
class ScenarioData:
    X: FeatureMatrix
    omega_star: MixtureParams
    counts: SampleCounts
    replicate: int = 0


def orthonormal_atoms(K: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """K x L matrix of the left singular vectors of an L x K Gaussian matrix."""
    if K > L:
        raise InvalidInputException(f"K={K} exceeds L={L}", parameter="K")
    U, _, _ = np.linalg.svd(rng.standard_normal((L, K)), full_matrices=False)
    return U.T.copy()


def generate_scenario(sc: Scenario, replicate: int = 0) -> ScenarioData:
    """Draw (X, omega_star, counts) for one replicate of ``sc``."""
    x_rng = substream(sc.seed, "replicate", replicate, "x")
    theta_rng = substream(sc.seed, "replicate", replicate, "theta")
    y_rng = substream(sc.seed, "replicate", replicate, "y")

    X = FeatureMatrix(x_rng.standard_normal((sc.p, sc.L)))
    omega_star = MixtureParams(
        alpha=np.full(sc.K, 1.0 / sc.K),
        thetas=orthonormal_atoms(sc.K, sc.L, theta_rng),
    )
    counts = sample(X, omega_star, sc.N, y_rng)
    return ScenarioData(X=X, omega_star=omega_star, counts=counts, replicate=replicate)
