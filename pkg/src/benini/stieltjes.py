"""One-sided Stieltjes class for Ben(beta): densities

    f_eps(x) = f(x) * (1 + eps * p(x)),   p = p_tilde / C,   0 <= eps <= 1,

sharing every moment with f.  The perturbation satisfies

    f(x) p_tilde(x) = exp(-(x-1)^(1/4)) sin((x-1)^(1/4)),

so all integrals are done in t = (x - 1)^(1/4) where the integrand is smooth
and exponentially damped.

C is astronomically large (ln C is about 89, 269 and 768 for beta = 0.5, 1
and 2), so it is carried in log space throughout.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import comb, wofz

from . import numerics
from .distributions import Benini
from .moments import MomentReport, benini_moment_closed
from .numerics import QuadratureResult, Tolerance, quartic_substitution

__all__ = [
    "Normalizer",
    "StieltjesMember",
    "unscaled_perturbation",
    "log_abs_unscaled_perturbation",
    "perturbation_envelope",
    "normalizing_constant",
    "member_density",
    "verify_moment_equality",
    "oscillatory_scale",
    "oscillatory_integral_quadrature",
    "damped_sine_moment",
    "oscillatory_integral_closed",
    "binomial_expansion_check",
    "heyde_perturbation_probe",
    "heyde_perturbation_closed",
]

_LOG_MAX = math.log(np.finfo(float).max)


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")


# -- perturbation ------------------------------------------------------------

def log_abs_unscaled_perturbation(x, beta: float):
    """ln |p_tilde(x)| for x > 1 (vectorized)."""
    x = np.asarray(x, dtype=float)
    t = (x - 1.0) ** 0.25
    lx = np.log(x)
    with np.errstate(divide="ignore"):
        return lx - t + beta * lx * lx + np.log(np.abs(np.sin(t))) - np.log(2.0 * beta * lx)


def perturbation_envelope(x, beta: float):
    """ln of |p_tilde| without the sine factor; an upper bound for ln |p_tilde|."""
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    return lx - (x - 1.0) ** 0.25 + beta * lx * lx - np.log(2.0 * beta * lx)


def unscaled_perturbation(x: float, beta: float) -> float:
    """p_tilde(x) = x exp(-(x-1)^(1/4) + beta ln(x)^2) sin((x-1)^(1/4)) / (2 beta ln x).

    Singular at x = 1; returns +-inf where the value leaves the float range.
    """
    _check_beta(beta)
    if not x > 1:
        raise ValueError(f"p_tilde is singular at x = 1 and undefined below; got x = {x}")
    s = math.sin((x - 1.0) ** 0.25)
    if s == 0.0:
        return 0.0
    log_abs = float(log_abs_unscaled_perturbation(x, beta))
    mag = math.exp(log_abs) if log_abs < _LOG_MAX else math.inf
    return math.copysign(mag, s)


class Normalizer(NamedTuple):
    log_C: float
    argmax: float

    @property
    def C(self) -> float:
        """sup |p_tilde| on [2, inf); inf when it exceeds the float range."""
        return math.exp(self.log_C) if self.log_C < _LOG_MAX else math.inf


def _envelope_tail_bound(beta):
    ln2 = math.log(2.0)

    def bound(x):
        # With L = ln(1 + t^4) <= 4 ln t + ln 2 and dL/dt <= 4/t (t >= 1), the
        # envelope slope in t is at most B(t) = (4/t)(1 + 2 beta (4 ln t + ln 2)) - 1,
        # which decreases for t >= e; B(t) < 0 there makes the envelope
        # nonincreasing on [x, inf).
        t = (x - 1.0) ** 0.25
        if t < math.e:
            return math.inf
        slope = 4.0 / t * (1.0 + 2.0 * beta * (4.0 * math.log(t) + ln2)) - 1.0
        return float(perturbation_envelope(x, beta)) if slope < 0 else math.inf

    return bound


@functools.lru_cache(maxsize=64)
def _normalizer(beta: float, growth: float) -> Normalizer:
    argmax, log_C = numerics.maximize_on_ray(
        lambda x: log_abs_unscaled_perturbation(x, beta), 2.0,
        Tolerance(max_evaluations=2_000_000), tail_bound=_envelope_tail_bound(beta),
        first_step=1e-4, growth=growth, block=4000, vectorized=True)
    return Normalizer(log_C, argmax)


def normalizing_constant(beta: float, tol: Tolerance | None = None) -> Normalizer:
    """C = sup_{x >= 2} |p_tilde(x)|, found on ln |p_tilde| (C overflows for beta >~ 1.9).

    The geometric grid has relative spacing 5e-4, fine enough to resolve the
    sine lobes (relative width 4 pi / (x-1)^(1/4) in x) wherever the envelope
    can still reach its maximum; golden section polishes the best lobe.
    """
    _check_beta(beta)
    return _normalizer(float(beta), 1.0005)


# -- members -----------------------------------------------------------------

@dataclass(frozen=True)
class StieltjesMember:
    beta: float
    epsilon: float
    log_C: float
    argmax: float

    def __post_init__(self):
        _check_beta(self.beta)
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @classmethod
    def build(cls, beta: float, epsilon: float) -> "StieltjesMember":
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
        norm = normalizing_constant(beta)
        return cls(float(beta), float(epsilon), norm.log_C, norm.argmax)

    @property
    def C(self) -> float:
        return Normalizer(self.log_C, self.argmax).C

    @property
    def base(self) -> Benini:
        return Benini(self.beta)

    def perturbation(self, x):
        """p(x) = p_tilde(x) / C for x > 1."""
        x = np.asarray(x, dtype=float)
        t = (x - 1.0) ** 0.25
        with np.errstate(over="ignore"):
            return np.sign(np.sin(t)) * np.exp(log_abs_unscaled_perturbation(x, self.beta) - self.log_C)

    def perturbation_term(self, x):
        """eps * f(x) * p(x) = (eps / C) exp(-t) sin(t), t = (x-1)^(1/4); 0 at x = 1."""
        x = np.asarray(x, dtype=float)
        t = np.where(x >= 1.0, x - 1.0, 0.0) ** 0.25
        return self.epsilon * np.exp(-t - self.log_C) * np.sin(t)

    def density(self, x):
        return member_density(self, x)


def member_density(member: StieltjesMember, x):
    """f_eps(x) = f(x) + (eps / C) exp(-(x-1)^(1/4)) sin((x-1)^(1/4)); f_eps(1) = 0."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = member.base.pdf(x) + np.where(x >= 1.0, member.perturbation_term(x), 0.0)
    return float(out[0]) if scalar else out


def _member_moment_quadrature(member: StieltjesMember, k: int, tol: Tolerance) -> QuadratureResult:
    """int_1^inf x^k f_eps(x) dx in t = (x-1)^(1/4)."""
    beta = member.beta
    w = member.epsilon * math.exp(-member.log_C) if member.log_C < 745 else 0.0

    def integrand(x):
        t = (x - 1.0) ** 0.25
        lx = math.log(x)
        f = 2.0 * beta * lx / x * math.exp(-beta * lx * lx) if x > 1.0 else 0.0
        return x**k * (f + w * math.exp(-t) * math.sin(t))

    # the Benini mass of x^k f sits near ln x = k / (2 beta)
    y_peak = k / (2.0 * beta)
    t_peak = math.expm1(y_peak) ** 0.25 if y_peak > 0 else 1.0
    y_far = y_peak + 12.0 / math.sqrt(beta)
    breaks = [t_peak, math.expm1(y_far) ** 0.25, 4.0 * k + 60.0]
    return numerics.integrate_semi_infinite(integrand, 1.0, tol, quartic_substitution(1.0),
                                            breakpoints=sorted(breaks))


def verify_moment_equality(beta: float, epsilon: float, k_max: int,
                           tol: Tolerance = Tolerance(relative=1e-12)) -> list[MomentReport]:
    """Quadrature of int x^k f_eps against the closed-form Benini moment, k = 0..k_max."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    member = StieltjesMember.build(beta, epsilon)
    out = []
    for k in range(k_max + 1):
        closed = benini_moment_closed(k, beta)
        q = _member_moment_quadrature(member, k, tol)
        out.append(MomentReport(f"stieltjes(beta={beta}, epsilon={epsilon})", k, closed, q,
                                abs(closed - q.value)))
    return out


# -- the vanishing oscillatory integrals -------------------------------------

def oscillatory_scale(n: int) -> float:
    """int_0^inf x^n exp(-x^(1/4)) dx = 4 Gamma(4n + 4)."""
    return 4.0 * math.gamma(4 * n + 4)


def oscillatory_integral_quadrature(n: int, tol: Tolerance = Tolerance(relative=1e-13)) -> QuadratureResult:
    """int_0^inf x^n exp(-x^(1/4)) sin(x^(1/4)) dx via x = t^4.

    The integral is zero, so the absolute tolerance is tol.relative * scale_n.
    """
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    scale = oscillatory_scale(n)
    zero_tol = Tolerance(relative=tol.relative, absolute=tol.relative * scale,
                         max_evaluations=tol.max_evaluations)

    def integrand(x):
        r = x**0.25
        return x**n * math.exp(-r) * math.sin(r)

    return numerics.integrate_semi_infinite(integrand, 0.0, zero_tol, quartic_substitution(0.0))


def _sin_quarter_pi(s: float) -> float:
    """sin(s pi / 4), exact at integer s."""
    if float(s).is_integer():
        return (0.0, math.sqrt(0.5), 1.0, math.sqrt(0.5), 0.0, -math.sqrt(0.5), -1.0, -math.sqrt(0.5))[int(s) % 8]
    return math.sin(math.pi * math.fmod(s / 4.0, 2.0))


def damped_sine_moment(s: float) -> float:
    """int_0^inf t^(s-1) exp(-t) sin(t) dt = Gamma(s) sin(s pi / 4) / 2^(s/2), s > 0."""
    if not s > 0:
        raise ValueError("s must be > 0")
    sine = _sin_quarter_pi(s)
    if sine == 0.0:
        return 0.0
    return math.copysign(math.exp(math.lgamma(s) - 0.5 * s * math.log(2.0) + math.log(abs(sine))), sine)


def oscillatory_integral_closed(n: int) -> float:
    """4 * damped_sine_moment(4n + 4), exactly 0 for every n >= 0."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    return 4.0 * damped_sine_moment(4 * n + 4)


def binomial_expansion_check(k: int, rel: float = 1e-9) -> bool:
    """Check int_0^inf (x+1)^k e^{-x^(1/4)} sin(x^(1/4)) dx = sum_j C(k,j) I_{k-j}, both ~ 0.

    Zero tests are relative to sum_j C(k,j) scale_{k-j}.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scale = math.fsum(comb(k, j, exact=True) * oscillatory_scale(k - j) for j in range(k + 1))
    tol = Tolerance(relative=1e-13, absolute=1e-13 * scale)

    def integrand(x):
        r = x**0.25
        return (x + 1.0) ** k * math.exp(-r) * math.sin(r)

    lhs = numerics.integrate_semi_infinite(integrand, 0.0, tol, quartic_substitution(0.0)).value
    rhs = math.fsum(comb(k, j, exact=True) * oscillatory_integral_quadrature(k - j).value
                    for j in range(k + 1))
    return abs(lhs) <= rel * scale and abs(rhs) <= rel * scale and abs(lhs - rhs) <= rel * scale


# -- the lognormal-style perturbation sin(2 pi ln x) -------------------------

def heyde_perturbation_probe(beta: float, k_max: int, tol: Tolerance = Tolerance(relative=1e-12)
                             ) -> list[tuple[int, float]]:
    """int_1^inf x^k f(x; beta) sin(2 pi ln x) dx for k = 0..k_max.

    Evaluated as int_0^inf 2 beta y exp(k y - beta y^2) sin(2 pi y) dy.  The
    values are reported as they come; nothing forces them to vanish.
    """
    _check_beta(beta)
    out = []
    for k in range(k_max + 1):
        peak = k / (2.0 * beta)
        shift = k * k / (4.0 * beta)

        def g(y, k=k, shift=shift):
            return 2.0 * beta * y * math.exp(k * y - beta * y * y - shift) * math.sin(2.0 * math.pi * y)

        zero_tol = Tolerance(relative=tol.relative,
                             absolute=tol.relative * (1.0 + peak) / math.sqrt(beta))
        stop = peak + 40.0 / math.sqrt(beta)
        r = numerics.integrate_interval(g, 0.0, stop, zero_tol,
                                        points=list(np.arange(0.5, stop, 0.5)))
        out.append((k, r.value * math.exp(shift)))
    return out


def heyde_perturbation_closed(beta: float, k: int) -> float:
    """Closed form of the probe integral through the Faddeeva function.

    With c = k + 2 pi i, int_0^inf 2 beta y e^{c y - beta y^2} dy
    = 1 + c sqrt(pi) / (2 sqrt(beta)) w(-i c / (2 sqrt(beta))); the probe is its
    imaginary part.
    """
    _check_beta(beta)
    c = complex(k, 2.0 * math.pi)
    z = c / (2.0 * math.sqrt(beta))
    val = 1.0 + c * math.sqrt(math.pi) / (2.0 * math.sqrt(beta)) * wofz(-1j * z)
    return float(val.imag)
