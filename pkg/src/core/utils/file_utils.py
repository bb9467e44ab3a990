#src/core/utils/file_utils.py
"""
CSV persistence for features, counts, parameters and run outputs.

Every file has one header row and LF line endings; floats are written with
``repr`` so they read back bit-exactly.
"""

import csv
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, List, Mapping, Sequence, Union

import numpy as np

from src.core.exceptions import InvalidInputException, PersistenceException
from src.estimation.hermite import LatentMoments
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts
from src.estimation.subspace import SubspaceEstimate

PathLike = Union[str, Path]
PARAM_FORMAT_VERSION = 1
DIAG_COLUMNS = (
    "method",
    "status",
    "iters",
    "converged",
    "loglik",
    "projection_iters",
    "min_hankel_eig",
    "vandermonde_cond",
    "alpha_floored",
)


def fmt(value) -> str:
    """Shortest round-trip text for numbers; ``str`` for everything else."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@contextmanager
def _writer(path: PathLike) -> Iterator:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            yield csv.writer(handle, lineterminator="\n")
    except OSError as exc:
        raise PersistenceException(
            f"cannot write {path}: {exc.strerror or exc}", path=str(path)
        ) from exc


def _read_rows(path: PathLike) -> List[List[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as exc:
        raise PersistenceException(
            f"cannot read {path}: {exc.strerror or exc}", path=str(path)
        ) from exc
    if not rows:
        raise PersistenceException(f"{path} is empty", path=str(path))
    return rows


def _floats(values: Sequence[str], path: PathLike) -> np.ndarray:
    try:
        return np.array([float(value) for value in values], dtype=float)
    except ValueError as exc:
        raise PersistenceException(
            f"malformed number in {path}: {exc}", path=str(path)
        ) from exc


def _ints(values: Sequence[str], path: PathLike, count: int) -> List[int]:
    if len(values) != count:
        raise PersistenceException(
            f"{path}: expected {count} integers, got {len(values)} fields",
            path=str(path),
        )
    numbers = _floats(values, path)
    if not np.all(np.isfinite(numbers)) or np.any(numbers != np.round(numbers)):
        raise PersistenceException(
            f"{path}: non-integer field in {list(values)}", path=str(path)
        )
    return [int(number) for number in numbers]


def _parsed(path: PathLike, build):
    try:
        return build()
    except InvalidInputException as exc:
        raise PersistenceException(
            f"invalid contents in {path}: {exc.message}", path=str(path)
        ) from exc


def write_table(
    path: PathLike, header: Sequence[str], rows: Iterable[Sequence]
) -> None:
    with _writer(path) as writer:
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(value) for value in row])


def write_features(path: PathLike, X: FeatureMatrix) -> None:
    write_table(path, [f"x{i + 1}" for i in range(X.L)], X.rows)


def read_matrix(path: PathLike) -> np.ndarray:
    """A headed numeric CSV as a 2-D array."""
    rows = _read_rows(path)
    body = rows[1:]
    if not body or any(len(row) != len(rows[0]) for row in body):
        raise PersistenceException(
            f"{path} must hold a rectangular table", path=str(path)
        )
    return np.vstack([_floats(row, path) for row in body])


def read_features(path: PathLike) -> FeatureMatrix:
    rows = read_matrix(path)
    return _parsed(path, lambda: FeatureMatrix(rows))


def write_counts(path: PathLike, counts: SampleCounts) -> None:
    if counts.population:
        integer_counts = np.zeros(counts.p, dtype=np.int64)
    else:
        integer_counts = counts.counts.astype(np.int64)
    write_table(
        path,
        ["index", "count", "freq"],
        ((j, int(integer_counts[j]), float(counts.freq[j])) for j in range(counts.p)),
    )


def read_counts(path: PathLike) -> SampleCounts:
    rows = _read_rows(path)
    if rows[0] != ["index", "count", "freq"]:
        raise PersistenceException(
            f"{path}: expected header index,count,freq", path=str(path)
        )
    short = [index for index, row in enumerate(rows[1:], start=2) if len(row) < 3]
    if short:
        raise PersistenceException(
            f"{path}: row {short[0]} has fewer than 3 fields", path=str(path)
        )
    counts = _floats([row[1] for row in rows[1:]], path)
    freq = _floats([row[2] for row in rows[1:]], path)
    if np.all(counts == 0):
        return _parsed(
            path, lambda: SampleCounts(freq=freq, n_samples=0, population=True)
        )
    return _parsed(path, lambda: SampleCounts.from_counts(counts))


def write_params(path: PathLike, omega: MixtureParams) -> None:
    with _writer(path) as writer:
        writer.writerow(["K", "L", "format_version"])
        writer.writerow([omega.K, omega.L, PARAM_FORMAT_VERSION])
        writer.writerow(["alpha"] + [fmt(a) for a in omega.alpha])
        for theta in omega.thetas:
            writer.writerow(["theta"] + [fmt(t) for t in theta])


def read_params(path: PathLike) -> MixtureParams:
    rows = _read_rows(path)
    if len(rows) < 3 or rows[0] != ["K", "L", "format_version"]:
        raise PersistenceException(f"{path} is not a parameter file", path=str(path))
    K, L, version = _ints(rows[1], path, 3)
    if K < 1 or L < 1:
        raise PersistenceException(f"{path}: K and L must be positive", path=str(path))
    if version != PARAM_FORMAT_VERSION:
        raise PersistenceException(
            f"{path}: unsupported format version {version}", path=str(path)
        )
    if rows[2][0] != "alpha" or len(rows) != 3 + K:
        raise PersistenceException(
            f"{path}: expected an alpha row and {K} theta rows", path=str(path)
        )
    alpha = _floats(rows[2][1:], path)
    thetas = [_floats(row[1:], path) for row in rows[3:] if row[0] == "theta"]
    if alpha.size != K or len(thetas) != K or any(t.size != L for t in thetas):
        raise PersistenceException(
            f"{path}: shape does not match K={K}, L={L}", path=str(path)
        )
    return _parsed(path, lambda: MixtureParams(alpha=alpha, thetas=np.vstack(thetas)))


def write_trace(path: PathLike, trace: Sequence[float]) -> None:
    write_table(path, ["iter", "loglik"], enumerate(trace))


def write_diag(path: PathLike, rows: Iterable[Mapping]) -> None:
    table = ([row[column] for column in DIAG_COLUMNS] for row in rows)
    write_table(path, DIAG_COLUMNS, table)


def write_moments(path: PathLike, moments: LatentMoments) -> None:
    with _writer(path) as writer:
        writer.writerow(["r", "m"])
        for r, value in enumerate(moments.m):
            writer.writerow([r, fmt(value)])
        writer.writerow(["i"] + [f"r{r}" for r in range(moments.K)])
        for i, row in enumerate(moments.mixed, start=2):
            writer.writerow([i] + [fmt(value) for value in row])


def write_subspace(path: PathLike, estimate: SubspaceEstimate) -> None:
    with _writer(path) as writer:
        writer.writerow(["eigval"] + [fmt(value) for value in estimate.eigvals])
        for row in estimate.V_hat:
            writer.writerow(["v"] + [fmt(value) for value in row])


def write_results(
    path: PathLike, columns: Sequence[str], rows: Iterable[Sequence]
) -> None:
    write_table(path, columns, rows)


def read_results(path: PathLike) -> List[dict]:
    rows = _read_rows(path)
    header = rows[0]
    return [dict(zip(header, row)) for row in rows[1:]]
