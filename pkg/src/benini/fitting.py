"""Fitting size distributions by regression on the empirical log survival
function, plus maximum likelihood for the two-parameter Benini law.

The regression model is

    ln S(x) = a_0 - a_1 ln x - a_2 (ln x)^2 - ... - a_k (ln x)^k

with k = 1 the Pareto line and k = 2 the Benini parabola.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "FitResult",
    "load_csv",
    "empirical_log_survival",
    "fit_log_survival_polynomial",
    "fit_model",
    "mle_benini2",
]


class DataError(ValueError):
    """Bad input data; ``line`` is the 1-based source line when known."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Dataset:
    observations: tuple
    name: str = "data"

    def __post_init__(self):
        obs = tuple(float(v) for v in self.observations)
        for i, v in enumerate(obs):
            if not (v > 0 and math.isfinite(v)):
                raise DataError(f"observation {i} is not a positive finite number: {v}")
        object.__setattr__(self, "observations", obs)

    @classmethod
    def from_values(cls, values: Iterable[float], name: str = "data") -> "Dataset":
        return cls(tuple(values), name)

    def __len__(self):
        return len(self.observations)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.observations, dtype=float)


def load_csv(path: str | Path, name: str | None = None) -> Dataset:
    """Read a single-column CSV of positive values, optional header ``income``."""
    path = Path(path)
    values = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 1:
                raise DataError(f"expected one column, found {len(row)}", lineno)
            cell = row[0].strip()
            if lineno == 1 and cell.lower() == "income":
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"not a number: {cell!r}", lineno) from None
            if not (v > 0 and math.isfinite(v)):
                raise DataError(f"income must be positive and finite, got {cell}", lineno)
            values.append(v)
    if not values:
        raise DataError(f"{path}: no observations")
    return Dataset(tuple(values), name or path.stem)


def empirical_log_survival(data: Dataset) -> np.ndarray:
    """Rows (ln x_(i), ln(1 - i/n)) for i = 1..n-1 over the order statistics.

    The last order statistic is dropped since its survival estimate is 0.
    """
    n = len(data)
    if n < 2:
        raise DataError("need at least 2 observations")
    x = np.sort(data.as_array())[:-1]
    i = np.arange(1, n)
    return np.column_stack([np.log(x), np.log1p(-i / n)])


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple  # a_0, a_1, ..., a_k
    rss: float
    n: int
    standard_errors: tuple = field(default=())

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def feasible(self) -> bool:
        """a_j >= 0 for j >= 1, as the distribution families require."""
        return all(a >= 0 for a in self.coefficients[1:])

    def as_dict(self) -> dict:
        return {"model": self.model, "coefficients": list(self.coefficients), "rss": self.rss,
                "n": self.n, "standard_errors": list(self.standard_errors), "feasible": self.feasible}


def _model_name(powers):
    if powers == (1,):
        return "pareto"
    if powers == (2,):
        return "benini2"
    if powers == (1, 2):
        return "benini3"
    return f"genbenini-{max(powers)}"


def fit_log_survival_polynomial(data: Dataset, degree: int, powers: Sequence[int] | None = None) -> FitResult:
    """Least squares of ln S on -(ln x)^j, j in ``powers`` (default 1..degree).

    Sign constraints are not enforced; see :attr:`FitResult.feasible`.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    powers = tuple(sorted(powers)) if powers is not None else tuple(range(1, degree + 1))
    if not powers or max(powers) > degree or min(powers) < 1:
        raise ValueError(f"powers must lie in 1..{degree}")
    pts = empirical_log_survival(data)
    if len(pts) < len(powers) + 1:
        raise DataError(f"need more than {degree + 1} observations for degree {degree}")
    y, s = pts[:, 0], pts[:, 1]
    X = np.column_stack([np.ones_like(y)] + [-(y**j) for j in powers])
    beta, _, rank, _ = np.linalg.lstsq(X, s, rcond=None)
    if rank < X.shape[1]:
        raise DataError("design matrix is rank deficient (too few distinct observations)")
    resid = s - X @ beta
    rss = float(resid @ resid)
    dof = max(len(s) - X.shape[1], 1)
    cov = np.linalg.inv(X.T @ X) * rss / dof
    se = np.sqrt(np.diag(cov))
    coeffs = np.zeros(degree + 1)
    ses = np.zeros(degree + 1)
    coeffs[0], ses[0] = beta[0], se[0]
    for j, b, e in zip(powers, beta[1:], se[1:]):
        coeffs[j], ses[j] = b, e
    return FitResult(_model_name(powers), tuple(float(c) for c in coeffs), rss, len(data),
                     tuple(float(e) for e in ses))


def fit_model(data: Dataset, model: str, degree: int | None = None) -> FitResult:
    """Fit by model id: pareto, benini2, benini3 or genbenini (needs ``degree``)."""
    if model == "pareto":
        return fit_log_survival_polynomial(data, 1)
    if model == "benini2":
        return fit_log_survival_polynomial(data, 2, powers=(2,))
    if model == "benini3":
        return fit_log_survival_polynomial(data, 2)
    if model == "genbenini":
        if degree is None:
            raise ValueError("genbenini needs a degree")
        fit = fit_log_survival_polynomial(data, degree)
        return dataclasses.replace(fit, model=f"genbenini-{degree}")
    raise ValueError(f"unknown model {model!r}")


def mle_benini2(data: Dataset) -> tuple[float, float]:
    """(sigma_hat, beta_hat): sample minimum and n / sum ln(x_i / sigma_hat)^2.

    Under Ben(beta, sigma), ln(X / sigma)^2 is exponential with rate beta.
    """
    if len(data) < 2:
        raise DataError("need at least 2 observations")
    x = data.as_array()
    sigma = float(x.min())
    ss = float(np.sum(np.log(x / sigma) ** 2))
    if ss == 0.0:
        raise DataError("all observations equal the minimum; beta is not identified")
    return sigma, len(x) / ss
