"""Moment (in)determinacy criteria: Carleman sums, the Krein logarithmic
integral and the Pakes convexity condition.

The verdicts produced here are criterion-based numerical conclusions, not
proofs; each report records which hypotheses its flags rest on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numerics
from .distributions import Benini, Distribution
from .moments import benini_log_moment, log_moment_quadrature
from .numerics import Tolerance

__all__ = [
    "CriteriaReport",
    "KreinTrace",
    "carleman_terms",
    "carleman_partial_sum",
    "carleman_partial_sums",
    "carleman_term_bound",
    "carleman_term_bound_check",
    "carleman_tail_bound",
    "krein_integral",
    "default_krein_uppers",
    "psi",
    "psi_second_derivative",
    "pakes_convexity_check",
    "criteria_report",
]

# terms below this are numerically zero
_LOG_TERM_FLOOR = math.log(1e-300)


# -- Carleman ----------------------------------------------------------------

def _log_moment(dist: Distribution, k: int) -> float:
    if isinstance(dist, Benini) and dist.sigma == 1:
        return benini_log_moment(k, dist.beta)
    return log_moment_quadrature(dist, k)[0]


def carleman_terms(dist: Distribution, K: int) -> np.ndarray:
    """mu_k^(-1/(2k)) for k = 1..K, from log moments; zero once below 1e-300."""
    if K < 1:
        raise ValueError("K must be >= 1")
    out = np.zeros(K)
    for k in range(1, K + 1):
        log_term = -_log_moment(dist, k) / (2.0 * k)
        if log_term < _LOG_TERM_FLOOR:
            break
        out[k - 1] = math.exp(log_term)
    return out


def carleman_partial_sums(dist: Distribution, K: int) -> list[tuple[int, float]]:
    terms = carleman_terms(dist, K)
    sums = np.cumsum(terms)
    return [(k, float(s)) for k, s in zip(range(1, K + 1), sums)]


def carleman_partial_sum(beta: float, K: int) -> float:
    """sum_{k=1}^K mu_k^(-1/(2k)) for Ben(beta)."""
    return float(np.sum(carleman_terms(Benini(beta), K)))


def carleman_term_bound(beta: float, k: int) -> float:
    """Upper bound (2 sqrt(beta) / (k sqrt(pi)))^(1/(2k)) * exp(-k / (8 beta)) on the
    k-th Carleman term, from mu_k >= k sqrt(pi) / (2 sqrt(beta)) * exp(k^2 / (4 beta)).
    """
    return math.exp(math.log(2.0 * math.sqrt(beta) / (k * math.sqrt(math.pi))) / (2.0 * k)
                    - k / (8.0 * beta))


def carleman_term_bound_check(beta: float, K: int) -> bool:
    terms = carleman_terms(Benini(beta), K)
    return all(terms[k - 1] <= carleman_term_bound(beta, k) for k in range(1, K + 1))


def _legendre(dist: Distribution, s: float) -> float:
    """sup_{y >= 0} (s y - H(y)); finite when H grows faster than linearly."""
    h1 = dist.hazard_d1
    if float(h1(0.0)) >= s:
        return 0.0
    hi = 1.0
    while float(h1(hi)) < s:
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    y = numerics.find_root_monotone(lambda u: float(h1(u)) - s, 0.0, hi)
    return s * y - float(dist.hazard(y))


def carleman_tail_bound(dist: Distribution, K: int) -> float:
    """Upper bound on sum_{k > K} mu_k^(-1/(2k)).

    Uses mu_k >= exp(k y - H(y)) for every y (Markov at the level e^y), so each
    term is at most b(k) = exp(-sup_y (k y - H(y)) / (2k)).  For Ben(beta) this
    is exp(-k / (8 beta)) and the tail is a geometric series; otherwise b is
    decreasing and the tail is bounded by the integral of b over [K, inf).
    """
    if not dist.all_moments_finite():
        return math.inf
    if isinstance(dist, Benini):
        q = math.exp(-1.0 / (8.0 * dist.beta))
        # (2 sqrt(beta)/(k sqrt(pi)))^(1/(2k)) <= 1 once k sqrt(pi) >= 2 sqrt(beta)
        k0 = max(K + 1, math.ceil(2.0 * math.sqrt(dist.beta / math.pi)))
        head = sum(carleman_term_bound(dist.beta, k) for k in range(K + 1, k0))
        return head + q**k0 / (1.0 - q)

    def b(s):
        return math.exp(-_legendre(dist, s) / (2.0 * s))

    res = numerics.integrate_semi_infinite(b, float(K), Tolerance(relative=1e-8))
    return res.value if res.converged else math.inf


# -- Krein -------------------------------------------------------------------

@dataclass(frozen=True)
class KreinTrace:
    c: float
    trace: list
    converged: bool
    increments: list

    @property
    def value(self) -> float:
        return self.trace[-1][1]


def default_krein_uppers(start: float = 1e6, stop: float = 1e12) -> list[float]:
    """Doubling sequence start, 2 start, ... ending exactly at stop."""
    out = [start]
    while out[-1] * 2 < stop:
        out.append(out[-1] * 2)
    out.append(stop)
    return out


def krein_integral(dist: Distribution, c: float = math.e, upper_limits: Sequence[float] | None = None,
                   tol: Tolerance = Tolerance(relative=1e-12, absolute=1e-6)) -> KreinTrace:
    """Truncated Krein integrals int_c^U -ln f(x^2) / (1 + x^2) dx.

    Segments are integrated in u = ln x, where the integrand becomes
    -ln f(e^{2u}) e^u / (1 + e^{2u}).  ``converged`` is set when the last
    increment is below ``tol.absolute`` and increments shrink along the trace.
    """
    if c * c <= dist.support_lower:
        raise ValueError(f"need f(c^2) > 0; c = {c} is too small for {dist}")
    uppers = list(upper_limits) if upper_limits is not None else default_krein_uppers()
    if any(b <= a for a, b in zip([c] + uppers, uppers)):
        raise ValueError("upper limits must be ascending and exceed c")
    log_sigma = math.log(dist.sigma)

    def g(u):
        z = 2.0 * u
        minus_log_f = -(float(dist.logpdf_log(z - log_sigma)) - z)
        # e^u / (1 + e^{2u}) = 1 / (2 cosh u)
        return minus_log_f / (2.0 * math.cosh(u))

    seg_tol = Tolerance(relative=tol.relative, absolute=0.0, max_evaluations=tol.max_evaluations)
    total = 0.0
    trace = []
    incs = []
    lo = math.log(c)
    for U in uppers:
        hi = math.log(U)
        r = numerics.integrate_interval(g, lo, hi, seg_tol)
        total += r.value
        incs.append(r.value)
        trace.append((float(U), total))
        lo = hi
    shrinking = all(abs(b) <= abs(a) for a, b in zip(incs[1:], incs[2:]))
    converged = len(incs) >= 2 and abs(incs[-1]) < tol.absolute and shrinking
    return KreinTrace(c, trace, converged, incs[1:])


# -- Pakes -------------------------------------------------------------------

def psi(dist: Distribution, y):
    """psi(y) = -ln f(e^y) for sigma = 1."""
    y = np.asarray(y, dtype=float)
    return -(dist.logpdf_log(y - math.log(dist.sigma)) - y)


def psi_second_derivative(dist: Distribution, y):
    """psi'' = H'' - (H''' H' - H''^2) / H'^2 with y measured from ln sigma."""
    y = np.asarray(y, dtype=float) - math.log(dist.sigma)
    h1, h2, h3 = dist.hazard_d1(y), dist.hazard_d2(y), dist.hazard_d3(y)
    return h2 - (h3 * h1 - h2 * h2) / (h1 * h1)


def pakes_convexity_check(dist_or_beta, grid: Sequence[float]) -> tuple[float, bool]:
    """(minimum divided second difference of psi on grid, analytic psi'' > 0 at all grid points).

    Accepts a distribution or a Benini shape beta, for which psi''(x) = 1/x^2 + 2 beta.
    """
    dist = Benini(dist_or_beta) if not isinstance(dist_or_beta, Distribution) else dist_or_beta
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or len(x) < 3 or np.any(np.diff(x) <= 0) or np.any(x <= 0):
        raise ValueError("grid must be ascending, inside (0, inf), with at least 3 points")
    p = psi(dist, x)
    h = np.diff(x)
    slopes = np.diff(p) / h
    second = 2.0 * np.diff(slopes) / (h[1:] + h[:-1])
    analytic = psi_second_derivative(dist, x)
    return float(second.min()), bool(np.all(analytic > 0))


# -- combined report ---------------------------------------------------------

@dataclass
class CriteriaReport:
    family: str
    moments_finite: bool
    carleman_partial_sums: list = field(default_factory=list)
    carleman_tail_bound: float = math.inf
    carleman_term_bound_ok: bool | None = None
    krein_trace: list = field(default_factory=list)
    krein_converged: bool = False
    convexity_min_second_difference: float = math.nan
    convexity_analytic_ok: bool = False
    indeterminate: bool | None = None
    verdict: str = ""
    justification: list = field(default_factory=list)

    @property
    def carleman_finite(self) -> bool:
        return math.isfinite(self.carleman_tail_bound)


def _krein_c(dist: Distribution) -> float:
    return max(math.e, 2.0 * math.sqrt(dist.support_lower))


def criteria_report(dist: Distribution, K: int = 50, krein_uppers: Sequence[float] | None = None,
                    grid: Sequence[float] | None = None) -> CriteriaReport:
    """Evaluate Carleman, Krein and Pakes for ``dist`` and combine them.

    Indeterminacy is flagged when the Krein integral is finite, or when the
    Carleman sum is finite and psi is convex (Pakes).  Families lacking some
    moments get the verdict "moment problem vacuous".
    """
    rep = CriteriaReport(str(dist), dist.all_moments_finite())
    if not rep.moments_finite:
        rep.verdict = "moment problem vacuous"
        rep.justification.append(f"not all moments exist for {dist}; no moment problem to decide")
        return rep

    rep.carleman_partial_sums = carleman_partial_sums(dist, K)
    rep.carleman_tail_bound = carleman_tail_bound(dist, K)
    if isinstance(dist, Benini):
        rep.carleman_term_bound_ok = carleman_term_bound_check(dist.beta, K)

    kt = krein_integral(dist, _krein_c(dist), krein_uppers)
    rep.krein_trace = kt.trace
    rep.krein_converged = kt.converged

    if grid is None:
        grid = np.linspace(0.05, 50.0, 1000) + math.log(dist.sigma)
    rep.convexity_min_second_difference, rep.convexity_analytic_ok = pakes_convexity_check(dist, grid)
    convex = rep.convexity_min_second_difference > 0 and rep.convexity_analytic_ok

    total = rep.carleman_partial_sums[-1][1] + rep.carleman_tail_bound
    if rep.carleman_finite:
        rep.justification.append(
            f"Carleman sum finite (<= {total:.6g}): Carleman cannot establish determinacy")
    else:
        rep.justification.append("Carleman sum not shown finite")
    if rep.krein_converged:
        rep.justification.append(
            f"Krein integral finite (c = {kt.c:.6g}, value ~ {kt.value:.10g}): indeterminate by Krein")
    else:
        rep.justification.append("Krein integral not shown finite")
    if convex:
        rep.justification.append("psi(y) = -ln f(e^y) convex on the grid (discrete and analytic)")
    if rep.carleman_finite and convex:
        rep.justification.append("Carleman finite + psi convex: indeterminate by Pakes")

    rep.indeterminate = bool(rep.krein_converged or (rep.carleman_finite and convex))
    rep.verdict = "indeterminate" if rep.indeterminate else "inconclusive"
    return rep
