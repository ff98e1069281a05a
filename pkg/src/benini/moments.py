"""Moments: closed forms for the Benini family, quadrature for every family,
moment tables and the divergence of the moment generating function.

Quadrature runs on y = ln(x / sigma), where E[X^k] = sigma^k E[exp(kY)]
turns the algebraic tail into a Gaussian-type one for the Benini laws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics
from .distributions import Benini, BeniniThree, Distribution, GenBenini, LogWeibull, Pareto
from .numerics import QuadratureResult, Tolerance

__all__ = [
    "DivergentMomentError",
    "MomentReport",
    "benini_moment_closed",
    "benini_moment_dm1",
    "benini_moment_log",
    "benini_log_moment",
    "closed_form_moment",
    "moment_quadrature",
    "moment_quadrature_forms",
    "log_moment_quadrature",
    "moment_table",
    "mgf_divergence_probe",
]

_LOG_MAX = math.log(np.finfo(float).max)
MOMENT_TOL = Tolerance(relative=1e-12)


class DivergentMomentError(ArithmeticError):
    """The requested moment is infinite for these parameters."""


def _check_order(k, beta):
    if int(k) != k or k < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")


def _log1p_erf(t: float) -> float:
    # ln(1 + erf t) = ln erfc(-t), accurate for t of either sign
    return math.log(math.erfc(-t))


def benini_moment_log(k: int, beta: float) -> float:
    """ln(mu_k - 1) for Ben(beta); never overflows."""
    _check_order(k, beta)
    if k == 0:
        return -math.inf
    t = k / (2.0 * math.sqrt(beta))
    return (math.log(k) + 0.5 * math.log(math.pi) - math.log(2.0) - 0.5 * math.log(beta)
            + t * t + _log1p_erf(t))


def benini_log_moment(k: int, beta: float) -> float:
    """ln mu_k for Ben(beta)."""
    return float(np.logaddexp(0.0, benini_moment_log(k, beta)))


def benini_moment_closed(k: int, beta: float) -> float:
    """E[X^k] for X ~ Ben(beta), sigma = 1:

        mu_k = 1 + k sqrt(pi) / (2 sqrt(beta)) * exp(k^2 / (4 beta)) * (1 + erf(k / (2 sqrt(beta))))

    Raises OverflowError once mu_k leaves the float range; use
    :func:`benini_moment_log` there.
    """
    _check_order(k, beta)
    if k == 0:
        return 1.0
    t = k / (2.0 * math.sqrt(beta))
    if t * t > _LOG_MAX - 10:
        log_rest = benini_moment_log(k, beta)
        if log_rest > _LOG_MAX:
            raise OverflowError(f"mu_{k}(beta={beta}) exceeds float range; ln(mu-1) = {log_rest:.6g}")
        return 1.0 + math.exp(log_rest)
    return 1.0 + k * math.sqrt(math.pi) / (2.0 * math.sqrt(beta)) * math.exp(t * t) * (1.0 + math.erf(t))


def benini_moment_dm1(k: int, beta: float) -> float:
    """Same moment through the parabolic cylinder function:

        mu_k = 1 + k (2 beta)^(-1/2) exp(k^2 / (8 beta)) D_{-1}(-k / sqrt(2 beta))
    """
    _check_order(k, beta)
    if k == 0:
        return 1.0
    d = numerics.parabolic_cylinder_Dm1(-k / math.sqrt(2.0 * beta))
    return 1.0 + k / math.sqrt(2.0 * beta) * math.exp(k * k / (8.0 * beta)) * d


def closed_form_moment(dist: Distribution, k: int) -> float | None:
    """Closed-form E[X^k] where one is available, else None."""
    if not dist.moment_exists(k):
        raise DivergentMomentError(f"moment of order {k} is infinite for {dist}")
    if isinstance(dist, Benini):
        return dist.sigma**k * benini_moment_closed(k, dist.beta)
    if isinstance(dist, LogWeibull) and dist.a == 2:
        return benini_moment_closed(k, 1.0)
    if isinstance(dist, Pareto):
        return dist.sigma**k * dist.alpha / (dist.alpha - k)
    if isinstance(dist, BeniniThree):
        a, b = dist.alpha, dist.beta
        if b == 0:
            return dist.sigma**k * a / (a - k)
        # 1 + k * int_0^inf exp((k - a) y - b y^2) dy
        c = (k - a) / (2.0 * math.sqrt(b))
        log_int = (0.5 * math.log(math.pi) - math.log(2.0) - 0.5 * math.log(b)
                   + c * c + math.log(math.erfc(-c)))
        return dist.sigma**k * (1.0 + k * math.exp(log_int))
    return None


# -- quadrature --------------------------------------------------------------

def _peak(exponent, dist: Distribution, k: float) -> tuple[float, float]:
    """Locate the maximum of exponent(y) = k*y + log-weight on y >= 0."""
    hi = 1e4
    while True:
        ys = np.concatenate([[0.0], np.geomspace(1e-6, hi, 4000)])
        with np.errstate(all="ignore"):
            vals = exponent(ys)
        vals = np.where(np.isfinite(vals), vals, -np.inf)
        j = int(np.argmax(vals))
        if j < len(ys) - 1 or hi >= 1e300:
            break
        hi *= 1e8
    lo, hi = ys[max(j - 1, 0)], ys[min(j + 1, len(ys) - 1)]
    y_star, v_star = numerics.golden_section_maximize(lambda y: float(exponent(np.float64(y))), lo, hi)
    if vals[j] > v_star:
        y_star, v_star = ys[j], vals[j]
    return float(y_star), float(v_star)


def _decay_scale(exponent, y_star, v_star, direction) -> float:
    """Distance from the peak at which the exponent has dropped by 1."""
    d = max(1e-3, 1e-10 * y_star)
    with np.errstate(all="ignore"):
        while d < 1e300:
            y = y_star + direction * d
            if y <= 0.0:
                return y_star
            if not float(exponent(np.float64(y))) > v_star - 1.0:
                return d
            d *= 2.0
    return d


def _log_integral(exponent, dist, k, tol) -> tuple[float, QuadratureResult]:
    """ln of int_0^inf exp(exponent(y)) dy, shifted by the peak value."""
    y_star, shift = _peak(exponent, dist, k)
    right = _decay_scale(exponent, y_star, shift, 1.0)
    breaks = [y_star + right, y_star + 40.0 * right]
    if y_star > 0:
        left = _decay_scale(exponent, y_star, shift, -1.0)
        breaks = [y for y in (y_star - 40.0 * left, y_star - left) if y > 0] + [y_star] + breaks

    def g(y):
        with np.errstate(all="ignore"):
            v = float(exponent(np.float64(y))) - shift
        return math.exp(v) if v > -745 else 0.0

    res = numerics.integrate_semi_infinite(g, 0.0, tol, breakpoints=breaks)
    return shift, res


def _check_finite(dist, k):
    if not dist.moment_exists(k):
        raise DivergentMomentError(f"moment of order {k} is infinite for {dist}")


def log_moment_quadrature(dist: Distribution, k: int, tol: Tolerance = MOMENT_TOL) -> tuple[float, QuadratureResult]:
    """ln E[X^k] by quadrature of the density form, usable past float range.

    Returns (log value, raw quadrature result of the peak-shifted integral).
    """
    _check_finite(dist, k)
    shift, res = _log_integral(lambda y: k * y + dist.logpdf_log(y), dist, k, tol)
    return k * math.log(dist.sigma) + shift + math.log(res.value), res


def moment_quadrature_forms(dist: Distribution, k: int, tol: Tolerance = MOMENT_TOL
                            ) -> tuple[QuadratureResult, QuadratureResult]:
    """E[X^k] as (density form, survival form).

    density form:  sigma^k int_0^inf exp(k y) g(y) dy, g the density of ln(X/sigma)
    survival form: sigma^k (1 + k int_0^inf exp(k y - H(y)) dy)
    """
    _check_finite(dist, k)
    sk = dist.sigma**k
    shift_d, rd = _log_integral(lambda y: k * y + dist.logpdf_log(y), dist, k, tol)
    if shift_d > _LOG_MAX - 5:
        raise OverflowError(f"moment {k} of {dist} exceeds float range; use log_moment_quadrature")
    scale_d = sk * math.exp(shift_d)
    density = QuadratureResult(rd.value * scale_d, rd.error_estimate * scale_d, rd.evaluations, rd.converged)
    if k == 0:
        return density, QuadratureResult(1.0, 0.0, 0, True)
    shift_s, rs = _log_integral(lambda y: k * y - dist.hazard(y), dist, k, tol)
    scale_s = sk * k * math.exp(shift_s)
    survival = QuadratureResult(sk + rs.value * scale_s, rs.error_estimate * scale_s, rs.evaluations, rs.converged)
    return density, survival


def moment_quadrature(dist: Distribution, k: int, tol: Tolerance = MOMENT_TOL) -> QuadratureResult:
    """E[X^k] by quadrature, cross-checked between the density and survival forms.

    The reported error estimate is the larger of the density-form estimate and
    the gap between the two forms; ``converged`` requires both forms to
    converge and to agree within their combined error bounds.
    """
    d, s = moment_quadrature_forms(dist, k, tol)
    gap = abs(d.value - s.value)
    combined = tol.bound(d.value) + tol.bound(s.value) + d.error_estimate + s.error_estimate
    return QuadratureResult(d.value, max(d.error_estimate, gap), d.evaluations + s.evaluations,
                            d.converged and s.converged and gap <= combined)


@dataclass(frozen=True)
class MomentReport:
    family: str
    k: int
    closed_form: float | None
    quadrature: QuadratureResult
    discrepancy: float | None

    @property
    def relative_discrepancy(self) -> float | None:
        if self.discrepancy is None:
            return None
        return self.discrepancy / abs(self.closed_form) if self.closed_form else math.inf


def moment_report(dist: Distribution, k: int, tol: Tolerance = MOMENT_TOL) -> MomentReport:
    closed = closed_form_moment(dist, k)
    quad = moment_quadrature(dist, k, tol)
    disc = None if closed is None else abs(closed - quad.value)
    return MomentReport(str(dist), k, closed, quad, disc)


def moment_table(betas: Sequence[float], k_max: int, tol: Tolerance = MOMENT_TOL) -> list[MomentReport]:
    """Closed-form and quadrature moments of Ben(beta), k = 1..k_max, row-major by beta."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return [moment_report(Benini(b), k, tol) for b in betas for k in range(1, k_max + 1)]


def mgf_divergence_probe(beta: float, t: float, truncations: Sequence[float],
                         tol: Tolerance = Tolerance(relative=1e-10)) -> list[tuple[float, float]]:
    """ln of int_1^M exp(t x) f(x; beta) dx for each truncation point M.

    The integrand grows like exp(t x) at the upper end, so each partial
    integral is evaluated relative to its value at M.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    ms = [float(m) for m in truncations]
    if any(m < 1 for m in ms) or any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("truncations must be ascending and >= 1")
    dist = Benini(beta)

    def h(x):
        return t * x + dist.logpdf(x)

    out = []
    for M in ms:
        xs = np.linspace(1.0, M, 2001)
        shift = float(np.max(h(xs)))
        # mass concentrates within a few multiples of 1/t below M
        pts = sorted({max(1.0, M - s / t) for s in (1, 4, 16, 64, 256)} - {1.0, M})

        def g(x):
            v = h(x) - shift
            return math.exp(v) if v > -745 else 0.0

        res = numerics.integrate_interval(g, 1.0, M, tol, points=pts)
        out.append((M, shift + math.log(res.value)))
    return out
