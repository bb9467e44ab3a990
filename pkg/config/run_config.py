#config/run_config.py
"""
Run configuration for the command-line harness.

A run file is an INI document with the sections [scenario], [em], [mom],
[subspace] and [bench]. Each section is validated by a pydantic model that
rejects unknown keys; command-line flags are merged over the file values.
"""

import configparser
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.settings import Settings
from src.bench.scenario import Scenario
from src.core.exceptions import ConfigurationException, InvalidInputException
from src.estimation.em import EmConfig

DEFAULT_METHODS = ["MoM", "EM-MoM", "EM-dr-rand-10", "EM-oracle"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ScenarioSection(_Section):
    K: Optional[int] = Field(default=None, ge=1)
    L: Optional[int] = Field(default=None, ge=1)
    p: Optional[int] = Field(default=None, ge=2)
    N: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    m_inits: int = Field(default=10, ge=1)

    @field_validator("methods", mode="before")
    @classmethod
    def split_methods(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [item.strip() for item in v.split(",") if item.strip()]
        return v


class EmSection(_Section):
    step_size: float = Field(default=0.2, gt=0)
    max_iters: int = Field(default=500, ge=1)
    rel_tol: float = Field(default=1e-6, gt=0)
    track_trace: bool = True


class MomSection(_Section):
    B: float = Field(default=1.0, gt=0)
    degree_cap: Optional[int] = Field(default=None, ge=1)


class SubspaceSection(_Section):
    n_axis_candidates: int = Field(default=200, ge=1)
    sigma: str = "identity"
    select_axis: bool = True


class BenchSection(_Section):
    replicates: int = Field(default=1, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)
    record_wall_time: bool = False


class RunConfig(_Section):
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    em: EmSection = Field(default_factory=EmSection)
    mom: MomSection = Field(default_factory=MomSection)
    subspace: SubspaceSection = Field(default_factory=SubspaceSection)
    bench: BenchSection = Field(default_factory=BenchSection)

    def require(self, *keys: str) -> None:
        """Fail unless every named [scenario] key is set."""
        for key in keys:
            if getattr(self.scenario, key) is None:
                raise ConfigurationException(
                    f"[scenario] {key} is required", section="scenario", key=key
                )

    def to_em_config(self) -> EmConfig:
        return EmConfig(
            step_size=self.em.step_size,
            max_iters=self.em.max_iters,
            rel_tol=self.em.rel_tol,
            track_trace=self.em.track_trace,
        )

    def to_scenario(self) -> Scenario:
        self.require("K", "L", "p", "N")
        sc = self.scenario
        try:
            return Scenario(
                K=sc.K,
                L=sc.L,
                p=sc.p,
                N=sc.N,
                seed=sc.seed,
                methods=tuple(sc.methods),
                m_inits=sc.m_inits,
                em_config=self.to_em_config(),
                B=self.mom.B,
                n_axis_candidates=self.subspace.n_axis_candidates,
                select_axis=self.subspace.select_axis,
                sigma=self.subspace.sigma,
            )
        except InvalidInputException as exc:
            raise ConfigurationException(
                exc.message, section="scenario", key=exc.parameter
            ) from exc


SECTIONS = tuple(RunConfig.model_fields)


def _read_ini(path: Union[str, Path]) -> Dict[str, Dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep K, L, N, B as written
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigurationException(
            f"cannot read configuration {path}: {exc.strerror or exc}"
        ) from exc
    except configparser.Error as exc:
        raise ConfigurationException(f"malformed configuration {path}: {exc}") from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> RunConfig:
    """Parse ``path`` if given, merge ``overrides`` skipping None, and validate."""
    raw: Dict[str, Dict[str, Any]] = _read_ini(path) if path is not None else {}
    for section in raw:
        if section not in SECTIONS:
            raise ConfigurationException(
                f"unknown section [{section}]", section=section
            )

    for section, values in (overrides or {}).items():
        for key, value in values.items():
            if value is not None:
                raw.setdefault(section, {})[key] = value

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = [str(part) for part in error["loc"]]
        section = loc[0] if loc else None
        key = loc[1] if len(loc) > 1 else None
        raise ConfigurationException(
            f"[{section}] {key}: {error['msg']}", section=section, key=key
        ) from exc


def resolve_threads(
    flag: Optional[int] = None, configured: Optional[int] = None
) -> int:
    """Threads from the flag, the run file, SOFTMIX_THREADS or the logical cores."""
    for value in (flag, configured):
        if value is not None:
            if int(value) < 1:
                raise ConfigurationException(
                    "threads must be >= 1", section="bench", key="threads"
                )
            return int(value)
    current = Settings()
    return current.threads or current.logical_cores
