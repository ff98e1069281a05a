"""Pareto, Benini (two- and three-parameter), generalized Benini and
log-Weibull distributions.

Every family here is the law of X = sigma * exp(Y) where Y >= 0 has
cumulative hazard H, i.e.

    P(X > x) = exp(-H(ln(x / sigma))),   x >= sigma.

The families differ only in H, so evaluation is written once in terms of
H and its derivatives and works in log space wherever tails matter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import find_root_monotone

__all__ = [
    "Distribution",
    "Pareto",
    "Benini",
    "BeniniThree",
    "GenBenini",
    "LogWeibull",
    "stochastically_dominates",
]


def _out(values, scalar):
    return float(values) if scalar else values


class Distribution:
    """Shared machinery; subclasses supply the cumulative hazard H(y)."""

    family = "abstract"
    sigma: float = 1.0

    # -- cumulative hazard and derivatives (y = ln(x / sigma) >= 0) --------
    def hazard(self, y):
        raise NotImplementedError

    def hazard_d1(self, y):
        raise NotImplementedError

    def hazard_d2(self, y):
        raise NotImplementedError

    def hazard_d3(self, y):
        raise NotImplementedError

    def hazard_inverse(self, h):
        raise NotImplementedError

    def moment_exists(self, k: float) -> bool:
        raise NotImplementedError

    def all_moments_finite(self) -> bool:
        return self.moment_exists(math.inf)

    @property
    def support_lower(self) -> float:
        return self.sigma

    def params(self) -> dict:
        raise NotImplementedError

    # -- evaluation ----------------------------------------------------------
    def _log_ratio(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.log(x / self.sigma)
        return x, y

    def sf(self, x):
        scalar = np.ndim(x) == 0
        x, y = self._log_ratio(np.atleast_1d(x))
        inside = x >= self.sigma
        out = np.ones_like(x)
        out[inside] = np.exp(-self.hazard(y[inside]))
        return _out(out[0] if scalar else out, scalar)

    def cdf(self, x):
        scalar = np.ndim(x) == 0
        x, y = self._log_ratio(np.atleast_1d(x))
        inside = x >= self.sigma
        out = np.zeros_like(x)
        out[inside] = -np.expm1(-self.hazard(y[inside]))
        return _out(out[0] if scalar else out, scalar)

    def logpdf_log(self, y):
        """Log density of Y = ln(X / sigma) at y >= 0."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self.hazard_d1(y)) - self.hazard(y)

    def logpdf(self, x):
        scalar = np.ndim(x) == 0
        x, y = self._log_ratio(np.atleast_1d(x))
        inside = x >= self.sigma
        out = np.full_like(x, -np.inf)
        out[inside] = self.logpdf_log(y[inside]) - np.log(x[inside])
        return _out(out[0] if scalar else out, scalar)

    def pdf(self, x):
        scalar = np.ndim(x) == 0
        out = np.exp(np.atleast_1d(self.logpdf(x)))
        return _out(out[0] if scalar else out, scalar)

    def quantile(self, u):
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((u < 0) | (u >= 1) | np.isnan(u)):
            raise ValueError("quantile is defined for u in [0, 1)")
        y = self.hazard_inverse(-np.log1p(-u))
        out = self.sigma * np.exp(y)
        return _out(out[0] if scalar else out, scalar)

    def sample(self, n: int, seed: int | None = None) -> np.ndarray:
        """``n`` variates by inverse transform from a seeded PCG64 stream."""
        if n < 0:
            raise ValueError("n must be >= 0")
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        if n == 0:
            return np.empty(0)
        return np.atleast_1d(self.quantile(u))

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.family}({args})"


def _check(cond, message):
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True, repr=False)
class Pareto(Distribution):
    alpha: float
    sigma: float = 1.0
    family = "pareto"

    def __post_init__(self):
        _check(self.alpha > 0, f"pareto: alpha must be > 0, got {self.alpha}")
        _check(self.sigma > 0, f"pareto: sigma must be > 0, got {self.sigma}")

    def hazard(self, y):
        return self.alpha * np.asarray(y, dtype=float)

    def hazard_d1(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.alpha)

    def hazard_d2(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    hazard_d3 = hazard_d2

    def hazard_inverse(self, h):
        return np.asarray(h) / self.alpha

    def moment_exists(self, k):
        return k < self.alpha

    def params(self):
        return {"alpha": self.alpha, "sigma": self.sigma}


@dataclass(frozen=True, repr=False)
class Benini(Distribution):
    """Two-parameter Benini law, F(x) = 1 - exp(-beta * ln(x/sigma)^2)."""

    beta: float
    sigma: float = 1.0
    family = "benini"

    def __post_init__(self):
        _check(self.beta > 0, f"benini: beta must be > 0, got {self.beta}")
        _check(self.sigma > 0, f"benini: sigma must be > 0, got {self.sigma}")

    def hazard(self, y):
        y = np.asarray(y, dtype=float)
        return self.beta * y * y

    def hazard_d1(self, y):
        return 2.0 * self.beta * np.asarray(y, dtype=float)

    def hazard_d2(self, y):
        return np.full_like(np.asarray(y, dtype=float), 2.0 * self.beta)

    def hazard_d3(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def hazard_inverse(self, h):
        return np.sqrt(np.asarray(h) / self.beta)

    def moment_exists(self, k):
        return True

    def params(self):
        return {"beta": self.beta, "sigma": self.sigma}


@dataclass(frozen=True, repr=False)
class BeniniThree(Distribution):
    """Three-parameter Benini law with hazard alpha*y + beta*y^2."""

    alpha: float
    beta: float
    sigma: float = 1.0
    family = "benini3"

    def __post_init__(self):
        _check(self.alpha >= 0 and self.beta >= 0,
               f"benini3: alpha and beta must be >= 0, got ({self.alpha}, {self.beta})")
        _check((self.alpha, self.beta) != (0, 0), "benini3: (alpha, beta) must not both be 0")
        _check(self.sigma > 0, f"benini3: sigma must be > 0, got {self.sigma}")

    def hazard(self, y):
        y = np.asarray(y, dtype=float)
        return y * (self.alpha + self.beta * y)

    def hazard_d1(self, y):
        return self.alpha + 2.0 * self.beta * np.asarray(y, dtype=float)

    def hazard_d2(self, y):
        return np.full_like(np.asarray(y, dtype=float), 2.0 * self.beta)

    def hazard_d3(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def hazard_inverse(self, h):
        # positive root of beta*y^2 + alpha*y - h, written without cancellation
        h = np.asarray(h, dtype=float)
        disc = np.sqrt(self.alpha**2 + 4.0 * self.beta * h)
        with np.errstate(invalid="ignore", divide="ignore"):
            y = 2.0 * h / (self.alpha + disc)
        return np.where(h == 0, 0.0, y)

    def moment_exists(self, k):
        return self.beta > 0 or k < self.alpha

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta, "sigma": self.sigma}


@dataclass(frozen=True, repr=False)
class GenBenini(Distribution):
    """Generalized Benini law: hazard a_1*y + a_2*y^2 + ... + a_k*y^k, sigma = 1."""

    coeffs: tuple
    family = "genbenini"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        _check(len(coeffs) >= 1, "genbenini: need at least one coefficient")
        _check(all(c >= 0 for c in coeffs), f"genbenini: coefficients must be >= 0, got {coeffs}")
        _check(any(c > 0 for c in coeffs), "genbenini: at least one coefficient must be > 0")

    @property
    def _poly(self):
        # numpy polynomial in ascending powers, zero constant term
        return np.polynomial.Polynomial((0.0,) + self.coeffs)

    def hazard(self, y):
        return self._poly(np.asarray(y, dtype=float))

    def hazard_d1(self, y):
        return self._poly.deriv(1)(np.asarray(y, dtype=float))

    def hazard_d2(self, y):
        return self._poly.deriv(2)(np.asarray(y, dtype=float))

    def hazard_d3(self, y):
        return self._poly.deriv(3)(np.asarray(y, dtype=float))

    def hazard_inverse(self, h):
        scalar = np.ndim(h) == 0
        h = np.atleast_1d(np.asarray(h, dtype=float))
        out = np.empty_like(h)
        H = self._poly
        for i, target in enumerate(h):
            if target == 0:
                out[i] = 0.0
                continue
            hi = 1.0
            while H(hi) < target:
                hi *= 2.0
            out[i] = find_root_monotone(lambda y: float(H(y)) - target, 0.0, hi)
        return out[0] if scalar else out

    def moment_exists(self, k):
        return any(c > 0 for c in self.coeffs[1:]) or k < self.coeffs[0]

    def params(self):
        return {"coeffs": list(self.coeffs)}


@dataclass(frozen=True, repr=False)
class LogWeibull(Distribution):
    """Law of exp(T) with T Weibull of shape a: F(x) = 1 - exp(-(ln x)^a)."""

    a: float
    family = "logweibull"

    def __post_init__(self):
        _check(self.a > 0, f"logweibull: a must be > 0, got {self.a}")

    def hazard(self, y):
        return np.asarray(y, dtype=float) ** self.a

    def hazard_d1(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return self.a * y ** (self.a - 1.0)

    def hazard_d2(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.a * (self.a - 1.0) * y ** (self.a - 2.0)

    def hazard_d3(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.a * (self.a - 1.0) * (self.a - 2.0) * y ** (self.a - 3.0)

    def hazard_inverse(self, h):
        return np.asarray(h, dtype=float) ** (1.0 / self.a)

    def moment_exists(self, k):
        # a == 1 is Pareto with alpha = 1
        return self.a > 1 or (self.a == 1 and k < 1)

    def params(self):
        return {"a": self.a}


def stochastically_dominates(beta1: float, beta2: float, grid: Sequence[float]) -> bool:
    """True iff F(x; beta1) <= F(x; beta2) at every grid point.

    For the two-parameter Benini family this holds exactly when beta1 <= beta2.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 1):
        raise ValueError("grid points must be >= 1")
    return bool(np.all(Benini(beta1).cdf(grid) <= Benini(beta2).cdf(grid)))
