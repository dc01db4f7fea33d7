"""Mixture expansions, moments, entropy, order statistics and PWMs.

Quadrature of the closed-form density is the primary route for every
integral quantity.  The mixture representations (valid for ``0 < alpha < 1``)
are exposed separately and are used as cross-checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import betainc, gammaln

from .baseline import Baseline
from .errors import DomainError, ParameterError, QuadratureError, UnsupportedExpansionError
from .family import GMOPG, dlog_density

__all__ = [
    "SeriesExpansion",
    "MomentSummary",
    "QuantileShape",
    "series_coefficients",
    "truncated_mixture_sf",
    "truncated_mixture_pdf",
    "raw_moment",
    "central_moment",
    "moment_summary",
    "mgf",
    "quantile_shape",
    "renyi_entropy",
    "renyi_entropy_series",
    "order_statistic_pdf",
    "order_statistic_pdf_series",
    "pwm_pg",
    "moment_via_pwm",
]

TAIL_TOL = 1e-10
MAX_TERMS = 10_000
UPPER_P = 1.0 - 1e-12
_BREAK_P = np.array([1e-8, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.9999, 1 - 1e-8])


# -- series -------------------------------------------------------------------------


def _negbin_tail(shape, ratio, J):
    """sum_{j>J} C(j+shape-1, j) (1-ratio)^j ratio^shape, computed without cancellation."""
    return betainc(np.asarray(J, dtype=float) + 1.0, shape, 1.0 - ratio)


def _adaptive_order(shape, ratio, tol=TAIL_TOL, cap=MAX_TERMS):
    js = np.arange(cap + 1)
    tails = _negbin_tail(shape, ratio, js)
    below = np.flatnonzero(tails < tol)
    return int(below[0]) if below.size else cap


def _negbin_weights(shape, ratio, J):
    """C(j+shape-1, j) (1-ratio)^j ratio^shape for j = 0..J."""
    j = np.arange(J + 1, dtype=float)
    if shape == 0:
        return (j == 0).astype(float)
    log_w = gammaln(j + shape) - gammaln(shape) - gammaln(j + 1.0) + shape * np.log(ratio)
    if ratio != 1:
        log_w = log_w + j * np.log1p(-ratio)
    else:
        log_w = np.where(j == 0, log_w, -np.inf)
    return np.exp(log_w)


@dataclass(frozen=True)
class SeriesExpansion:
    """Mixture weights of the survival/density expansion.

    ``eta_prime[j]`` weights ``S_PG**(j + theta)`` in the survival function and
    ``eta[j] = (j + theta) * eta_prime[j]`` weights ``g_PG * S_PG**(j + theta - 1)``
    in the density.  ``tail_mass`` is ``1 - sum(eta_prime)``, evaluated as an
    incomplete beta function so it stays accurate far below machine epsilon.
    """

    theta: float
    alpha: float
    truncation: int
    eta_prime: np.ndarray
    eta: np.ndarray
    tail_mass: float


def _check_expansion_alpha(alpha):
    if not 0 < alpha < 1:
        raise UnsupportedExpansionError(f"the mixture expansion needs 0 < alpha < 1, got alpha={alpha}")


def series_coefficients(theta: float, alpha: float, J: int | None = None) -> SeriesExpansion:
    """Mixture weights up to order ``J``; ``J=None`` picks the order adaptively."""
    if theta <= 0:
        raise ParameterError("theta must be positive")
    _check_expansion_alpha(alpha)
    if J is None:
        J = _adaptive_order(theta, alpha)
    if J < 0:
        raise ValueError("J must be nonnegative")
    eta_prime = _negbin_weights(theta, alpha, J)
    eta = (np.arange(J + 1) + theta) * eta_prime
    return SeriesExpansion(theta, alpha, J, eta_prime, eta, float(_negbin_tail(theta, alpha, J)))


def truncated_mixture_sf(params: GMOPG, t, J: int | None = None):
    exp = series_coefficients(params.theta, params.alpha, J)
    log_S = params._parts(t).log_S
    powers = np.arange(exp.truncation + 1) + params.theta
    return np.sum(exp.eta_prime * np.exp(np.multiply.outer(log_S, powers)), axis=-1)


def truncated_mixture_pdf(params: GMOPG, t, J: int | None = None):
    exp = series_coefficients(params.theta, params.alpha, J)
    parts = params._parts(t)
    powers = np.arange(exp.truncation + 1) + params.theta - 1.0
    terms = exp.eta * np.exp(np.asarray(parts.log_gpg)[..., None] + np.multiply.outer(parts.log_S, powers))
    return np.sum(terms, axis=-1)


# -- quadrature helpers ----------------------------------------------------------------


def _segments(model: GMOPG, upper_p=UPPER_P):
    pts = model.quantile(_BREAK_P[_BREAK_P < upper_p])
    t_hi = float(model.quantile(upper_p))
    edges = np.concatenate(([0.0], pts, [t_hi]))
    return np.unique(edges), t_hi


def _checked_quad(fn, a, b, epsabs, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=500, full_output=1)
    value, abserr = out[0], out[1]
    if not np.isfinite(value):
        raise QuadratureError(f"integral over ({a}, {b}) is not finite")
    if len(out) > 3 and abserr > max(100 * epsabs, 1e3 * epsrel * abs(value)):
        raise QuadratureError(f"quadrature over ({a}, {b}) did not converge: {out[3]} (error estimate {abserr:.3g})")
    return value


def _integrate(log_integrand, model: GMOPG, *, tail=True, epsabs=1e-13, epsrel=1e-11):
    """Integrate ``exp(log_integrand(t))`` over (0, inf), split at model quantiles.

    The range is cut at the 1 - 1e-12 quantile; ``tail=True`` adds the remainder
    up to infinity as one more adaptive piece.
    """

    def fn(t):
        if t <= 0:
            return 0.0
        return float(np.exp(log_integrand(t)))

    edges, t_hi = _segments(model)
    total = sum(_checked_quad(fn, a, b, epsabs, epsrel) for a, b in zip(edges[:-1], edges[1:]))
    if tail:
        total += _checked_quad(fn, t_hi, np.inf, epsabs, epsrel)
    return total


# -- moments ------------------------------------------------------------------------


def raw_moment(params: GMOPG, s: int) -> float:
    """E[T**s] by adaptive quadrature of the density."""
    if s < 1:
        raise ValueError("moment order must be >= 1")
    return _integrate(lambda t: s * np.log(t) + params.logpdf(t), params)


def central_moment(params: GMOPG, k: int, mean: float | None = None) -> float:
    """E[(T - mean)**k], integrated directly to avoid raw-moment cancellation."""
    if mean is None:
        mean = raw_moment(params, 1)

    def fn(t):
        return 0.0 if t <= 0 else float((t - mean) ** k * params.pdf(t))

    edges, t_hi = _segments(params)
    edges = np.unique(np.concatenate((edges, [mean])))
    total = sum(_checked_quad(fn, a, b, 1e-15, 1e-11) for a, b in zip(edges[:-1], edges[1:]))
    return total + _checked_quad(fn, t_hi, np.inf, 1e-15, 1e-11)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def moment_summary(params: GMOPG) -> MomentSummary:
    """Mean, variance and standardized third/fourth moments (kurtosis is not excess)."""
    mean = raw_moment(params, 1)
    var = central_moment(params, 2, mean)
    if not var > 0:
        raise DomainError("degenerate distribution: zero variance")
    m3 = central_moment(params, 3, mean)
    m4 = central_moment(params, 4, mean)
    return MomentSummary(mean, var, m3 / var**1.5, m4 / var**2)


def mgf_tail_bound(params: GMOPG) -> float:
    """Largest ``s`` for which E[exp(sT)] is finite, read off the far-tail log-slope."""
    t_hi = params.quantile(UPPER_P)
    t_far = params.baseline.isf(1e-300)
    slopes = -dlog_density(params, np.array([t_hi, t_far]))
    return float(np.min(slopes))


def mgf(params: GMOPG, s: float) -> float:
    """E[exp(sT)] by quadrature; raises ``DomainError`` past the tail decay rate."""
    if s == 0:
        return 1.0
    bound = mgf_tail_bound(params)
    if s >= bound:
        raise DomainError(f"mgf diverges: s={s} is not below the tail decay rate {bound:.6g}")
    return _integrate(lambda t: s * t + params.logpdf(t), params)


# -- quantile-based shape -----------------------------------------------------------


class QuantileShape(NamedTuple):
    galton: float
    moors: float


def quantile_shape(params: GMOPG) -> QuantileShape:
    """Galton (octile) skewness and Moors kurtosis."""
    q = params.quantile(np.arange(1, 8) / 8.0)
    q1, q2, q3, q4, q5, q6, q7 = q
    spread = q6 - q2
    return QuantileShape((q6 - 2 * q4 + q2) / spread, (q7 - q5 + q3 - q1) / spread)


# -- entropy --------------------------------------------------------------------------


def _check_delta(delta):
    if delta <= 0 or delta == 1:
        raise DomainError("Renyi order must be positive and different from 1")


def renyi_entropy(params: GMOPG, delta: float) -> float:
    """(1 - delta)^-1 log of the integral of f**delta."""
    _check_delta(delta)
    integral = _integrate(lambda t: delta * params.logpdf(t), params)
    if not integral > 0:
        raise QuadratureError("integral of f**delta is not positive")
    return float(np.log(integral) / (1.0 - delta))


def renyi_entropy_series(params: GMOPG, delta: float, J: int | None = None) -> float:
    """Mixture form of the Renyi entropy; cross-check for ``0 < alpha < 1``."""
    _check_delta(delta)
    _check_expansion_alpha(params.alpha)
    th, a = params.theta, params.alpha
    k = delta * (th + 1.0)
    if J is None:
        J = _adaptive_order(k, a, tol=1e-13)
    j = np.arange(J + 1, dtype=float)
    log_mu = delta * np.log(th) + delta * th * np.log(a) + j * np.log1p(-a) + gammaln(k + j) - gammaln(k) - gammaln(j + 1.0)

    def vec(t):
        parts = params._parts(t)
        base = delta * (parts.log_gpg + (th - 1.0) * parts.log_S)
        return np.exp(log_mu + base + j * parts.log_S)

    total = _vector_integrate(vec, params.replace(theta=1.0, alpha=1.0))
    return float(np.log(total.sum()) / (1.0 - delta))


def _vector_integrate(fn, model: GMOPG):
    edges, t_hi = _segments(model)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total = total + integrate.quad_vec(fn, max(a, 1e-300), b, epsabs=1e-14, epsrel=1e-11, limit=500)[0]
    total = total + integrate.quad_vec(fn, t_hi, np.inf, epsabs=1e-14, epsrel=1e-11, limit=500)[0]
    return total


# -- order statistics ---------------------------------------------------------------


def _check_order(i, n):
    if not (isinstance(i, (int, np.integer)) and isinstance(n, (int, np.integer)) and 1 <= i <= n):
        raise ParameterError(f"order statistic needs integers 1 <= i <= n, got i={i}, n={n}")


def _log_order_const(i, n):
    return gammaln(n + 1.0) - gammaln(i) - gammaln(n - i + 1.0)


def order_statistic_pdf(params: GMOPG, i: int, n: int, t):
    """Density of the i-th smallest of n draws."""
    _check_order(i, n)
    log_sf = params.logsf(t)
    log_cdf = np.log(-np.expm1(log_sf)) if i > 1 else 0.0
    tail = (n - i) * log_sf if n > i else 0.0
    return np.exp(_log_order_const(i, n) + params.logpdf(t) + (i - 1) * log_cdf + tail)


def order_statistic_pdf_series(params: GMOPG, i: int, n: int, t, J: int = 200):
    """Order-statistic density from the mixture expansions (cross-check, ``0 < alpha < 1``).

    Each power sf**m of the survival function is expanded with its own
    negative-binomial weights of shape ``theta * m``.
    """
    _check_order(i, n)
    _check_expansion_alpha(params.alpha)
    th, a = params.theta, params.alpha
    log_S = params._parts(t).log_S
    f = truncated_mixture_pdf(params, t, J)
    total = np.zeros_like(np.asarray(log_S, dtype=float))
    for l in range(i):
        m = n + l - i
        if m == 0:
            sf_power = 1.0
        else:
            w = _negbin_weights(th * m, a, J)
            sf_power = np.sum(w * np.exp(np.multiply.outer(log_S, np.arange(J + 1) + th * m)), axis=-1)
        binom = np.exp(gammaln(i) - gammaln(l + 1.0) - gammaln(i - l))
        total = total + (-1) ** l * binom * sf_power
    return np.exp(_log_order_const(i, n)) * f * total


# -- probability weighted moments ----------------------------------------------------


def pwm_pg(lam: float, baseline: Baseline, p: float, q: float, r: float) -> float:
    """E[T^p F^q (1 - F)^r] under the Poisson-G distribution with rate ``lam``.

    ``lam = 0`` is read as the baseline itself.  Non-integer ``q``, ``r`` > -1
    are accepted since the moment identity uses ``r = j + theta - 1``.
    """
    if p < 0 or q <= -1 or r <= -1:
        raise DomainError("pwm needs p >= 0 and q, r > -1")
    pg = GMOPG(1.0, 1.0, lam, baseline)

    def log_integrand(t):
        parts = pg._parts(t)
        out = parts.log_gpg
        if p:
            out = out + p * np.log(t)
        if q:
            out = out + q * parts.log_F
        if r:
            out = out + r * parts.log_S
        return out

    return _integrate(log_integrand, pg)


def moment_via_pwm(params: GMOPG, s: int, J: int | None = None) -> float:
    """E[T**s] as sum_j eta_j * pwm_pg(lam, baseline, s, 0, j + theta - 1)."""
    if s < 1:
        raise ValueError("moment order must be >= 1")
    exp = series_coefficients(params.theta, params.alpha, J)
    r = np.arange(exp.truncation + 1) + params.theta - 1.0
    pg = params.replace(theta=1.0, alpha=1.0)

    def vec(t):
        parts = pg._parts(t)
        return np.exp(s * np.log(t) + parts.log_gpg + r * parts.log_S)

    gammas = _vector_integrate(vec, pg)
    return float(np.dot(exp.eta, gammas))
