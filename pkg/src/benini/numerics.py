"""Numerical engine: special functions, semi-infinite quadrature, root finding
and bounded one-dimensional maximization.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "ConvergenceError",
    "Tolerance",
    "QuadratureResult",
    "Substitution",
    "exponential_substitution",
    "quartic_substitution",
    "erf",
    "erfc",
    "parabolic_cylinder_Dm1",
    "log_parabolic_cylinder_Dm1",
    "log_gamma",
    "integrate_semi_infinite",
    "integrate_interval",
    "golden_section_maximize",
    "maximize_on_ray",
    "maximize_abs_on_ray",
    "find_root_monotone",
]

_HALF_LOG_HALF_PI = 0.5 * math.log(math.pi / 2.0)
_LOG_MAX = math.log(np.finfo(float).max)
# quad refuses epsrel below 50 * machine epsilon when epsabs is zero
_MIN_EPSREL = 50.0 * np.finfo(float).eps


class ConvergenceError(ArithmeticError):
    """Raised when an iterative routine exhausts its evaluation budget.

    ``result`` carries the best estimate available at the time of failure.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Tolerance:
    relative: float = 1e-10
    absolute: float = 0.0
    max_evaluations: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.relative < 1.0:
            raise ValueError(f"relative tolerance must lie in (0, 1), got {self.relative}")
        if not self.absolute >= 0.0:
            raise ValueError(f"absolute tolerance must be >= 0, got {self.absolute}")
        if int(self.max_evaluations) != self.max_evaluations or self.max_evaluations < 1:
            raise ValueError(f"max_evaluations must be a positive integer, got {self.max_evaluations}")

    def bound(self, value: float) -> float:
        return max(self.absolute, self.relative * abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def __float__(self):
        return float(self.value)


class Substitution(NamedTuple):
    """Change of variables x = forward(t), t in [start, inf)."""

    forward: Callable[[float], float]
    jacobian: Callable[[float], float]
    start: float


def exponential_substitution(lower: float) -> Substitution:
    """x = lower * e^y, y >= 0."""
    if lower <= 0:
        raise ValueError("exponential substitution needs lower > 0")
    return Substitution(lambda y: lower * math.exp(y), lambda y: lower * math.exp(y), 0.0)


def quartic_substitution(lower: float) -> Substitution:
    """x = lower + t^4, t >= 0."""
    return Substitution(lambda t: lower + t**4, lambda t: 4.0 * t**3, 0.0)


# -- special functions -------------------------------------------------------

def erf(x: float) -> float:
    return math.erf(x)


def erfc(x: float) -> float:
    return math.erfc(x)


def log_parabolic_cylinder_Dm1(x: float) -> float:
    """ln D_{-1}(x), finite for every finite x."""
    if x >= 0.0:
        # scaled complement keeps erfc(x/sqrt2) from underflowing
        return _HALF_LOG_HALF_PI - 0.25 * x * x + math.log(special.erfcx(x / math.sqrt(2.0)))
    return _HALF_LOG_HALF_PI + 0.25 * x * x + math.log(math.erfc(x / math.sqrt(2.0)))


def parabolic_cylinder_Dm1(x: float) -> float:
    """Parabolic cylinder function of order -1,

        D_{-1}(x) = sqrt(pi/2) * exp(x^2/4) * erfc(x/sqrt(2)).

    Raises OverflowError when the result exceeds the float range, which
    happens for x below roughly -53.
    """
    log_value = log_parabolic_cylinder_Dm1(x)
    if log_value > _LOG_MAX:
        raise OverflowError(f"D_-1({x}) exceeds float range (log value {log_value:.6g})")
    return math.exp(log_value)


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma is defined here for x > 0 only, got {x}")
    return math.lgamma(x)


# -- quadrature --------------------------------------------------------------

def _epsrel(tol: Tolerance) -> float:
    if tol.absolute <= 0.0:
        return max(tol.relative, _MIN_EPSREL)
    return tol.relative


def _result(value, err, neval, tol, ier) -> QuadratureResult:
    ok = ier == 0 and math.isfinite(value) and err <= tol.bound(value)
    return QuadratureResult(float(value), float(abs(err)), int(neval), bool(ok))


def integrate_interval(f: Callable[[float], float], a: float, b: float,
                       tol: Tolerance = Tolerance(), points: Sequence[float] | None = None
                       ) -> QuadratureResult:
    """Adaptive Gauss-Kronrod on a finite interval [a, b]."""
    limit = max(50, tol.max_evaluations // 21)
    if points is not None:
        points = [p for p in points if a < p < b] or None
    value, err, info, *_ = integrate.quad(
        f, a, b, epsabs=tol.absolute, epsrel=_epsrel(tol), limit=limit,
        points=points, full_output=1)
    return _result(value, err, info["neval"], tol, 0 if len(_) == 0 else 1)


def integrate_semi_infinite(f: Callable[[float], float], lower: float,
                            tol: Tolerance = Tolerance(),
                            substitution: Substitution | None = None,
                            breakpoints: Sequence[float] | None = None) -> QuadratureResult:
    """Integrate ``f`` over [lower, inf).

    With a ``substitution`` the integrand becomes f(forward(t)) * jacobian(t)
    on [start, inf).  ``breakpoints`` (in the integration variable) mark
    features such as a far-away peak; the range up to the last breakpoint is
    handled as a finite interval and only the remainder is mapped to (0, 1].
    Points whose image overflows the float range contribute zero.
    """
    if substitution is None:
        g, start = f, lower
    else:
        fwd, jac = substitution.forward, substitution.jacobian

        def g(t):
            try:
                return f(fwd(t)) * jac(t)
            except OverflowError:
                # beyond the float range an integrable tail has long vanished
                return 0.0

        start = substitution.start

    limit = max(50, tol.max_evaluations // 15)
    pieces = []
    if breakpoints:
        inner = sorted(p for p in breakpoints if p > start)
        if inner:
            cut = inner[-1]
            pieces.append(integrate.quad(g, start, cut, epsabs=tol.absolute / 2,
                                         epsrel=_epsrel(tol), limit=limit,
                                         points=inner[:-1] or None, full_output=1))
            start = cut
    pieces.append(integrate.quad(g, start, np.inf, epsabs=tol.absolute / 2 if pieces else tol.absolute,
                                 epsrel=_epsrel(tol), limit=limit, full_output=1))
    value = math.fsum(p[0] for p in pieces)
    err = sum(p[1] for p in pieces)
    neval = sum(p[2]["neval"] for p in pieces)
    ier = max(0 if len(p) == 3 else 1 for p in pieces)
    return _result(value, err, neval, tol, ier)


# -- maximization ------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_maximize(f: Callable[[float], float], a: float, b: float,
                            xtol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b]; returns (argmax, max)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(c) + abs(d)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _as_vector_fn(f, vectorized):
    if vectorized:
        return lambda xs: np.asarray(f(xs), dtype=float)
    return lambda xs: np.fromiter((f(float(x)) for x in xs), dtype=float, count=len(xs))


def maximize_on_ray(f: Callable, lower: float, tol: Tolerance = Tolerance(), *,
                    tail_bound: Callable[[float], float] | None = None,
                    first_step: float | None = None, growth: float = 1.01,
                    block: int = 2000, vectorized: bool = False) -> tuple[float, float]:
    """Maximize ``f`` on [lower, inf).

    The search evaluates ``f`` at ``lower`` and at lower + first_step * growth**i,
    block by block, then polishes the best grid point by golden section inside
    its neighbouring grid cells.  ``tail_bound(x)`` must bound f from above on
    [x, inf); the scan stops once it drops below the running maximum.  Without
    a tail bound ``f`` is taken to be nonnegative and decaying, and the scan
    stops after the last block stays below tol.bound(best) for a full decade
    beyond the argmax.
    """
    if growth <= 1.0:
        raise ValueError("growth must exceed 1")
    h = first_step if first_step is not None else 1e-6 * max(1.0, abs(lower))
    F = _as_vector_fn(f, vectorized)

    xs_all = [np.array([lower])]
    fs_all = [F(xs_all[0])]
    best = float(fs_all[0][0])
    best_x = lower
    n_eval = 1
    i0 = 0
    while True:
        offsets = h * growth ** np.arange(i0, i0 + block)
        xs = lower + offsets
        fs = F(xs)
        n_eval += block
        i0 += block
        xs_all.append(xs)
        fs_all.append(fs)
        finite = np.isfinite(fs)
        if np.isposinf(fs).any() or np.isnan(fs).any():
            raise ConvergenceError("objective is not finite on the search grid",
                                   (best_x, best))
        j = int(np.argmax(np.where(finite, fs, -np.inf)))
        if fs[j] > best:
            best, best_x = float(fs[j]), float(xs[j])
        x_end = float(xs[-1])
        if tail_bound is not None:
            if tail_bound(x_end) < best:
                break
        elif (fs.max() <= tol.bound(best) and x_end - lower >= 10.0 * (best_x - lower)) \
                or (best > 0 and fs.max() <= 1e-3 * tol.relative * best):
            break
        if n_eval >= tol.max_evaluations:
            raise ConvergenceError(
                f"no maximum bracketed within {tol.max_evaluations} evaluations "
                f"(search reached x={x_end:.6g})", (best_x, best))

    xs = np.concatenate(xs_all)
    fs = np.concatenate(fs_all)
    j = int(np.argmax(fs))
    lo = xs[max(j - 1, 0)]
    hi = xs[min(j + 1, len(xs) - 1)]
    scalar = (lambda x: float(F(np.array([x]))[0]))
    x_ref, f_ref = golden_section_maximize(scalar, float(lo), float(hi))
    if f_ref > fs[j]:
        return float(x_ref), float(f_ref)
    return float(xs[j]), float(fs[j])


def maximize_abs_on_ray(f: Callable, lower: float, tol: Tolerance = Tolerance(),
                        **kwargs) -> tuple[float, float]:
    """Return (argmax, sup |f|) over [lower, inf) for f decaying to zero."""
    if kwargs.get("vectorized"):
        return maximize_on_ray(lambda x: np.abs(f(x)), lower, tol, **kwargs)
    return maximize_on_ray(lambda x: abs(f(x)), lower, tol, **kwargs)


# -- roots -------------------------------------------------------------------

def find_root_monotone(g: Callable[[float], float], lo: float, hi: float,
                       tol: Tolerance = Tolerance(relative=4 * np.finfo(float).eps)) -> float:
    """Root of a continuous monotone ``g`` bracketed by [lo, hi]."""
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0:
        raise ValueError(f"g({lo})={g_lo:.6g} and g({hi})={g_hi:.6g} do not bracket a root")
    rtol = max(tol.relative, 4 * np.finfo(float).eps)
    xtol = tol.absolute if tol.absolute > 0 else 1e-300
    return optimize.brentq(g, lo, hi, xtol=xtol, rtol=rtol, maxiter=max(100, tol.max_evaluations))
