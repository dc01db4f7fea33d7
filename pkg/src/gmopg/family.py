"""The GMOP-G(theta, alpha, lambda) family.

The family is evaluated as a generalized Marshall-Olkin transform applied to
the Poisson-G survival function,

    S_PG(t)  = (exp(-lam G) - exp(-lam)) / (1 - exp(-lam))
    sf(t)    = [alpha S_PG / (1 - (1 - alpha) S_PG)] ** theta

Everything is carried in log space through the helper ``r(x) = (1 - e^-x)/x``,
which turns both P-G building blocks into products that are well defined for
negative ``lam`` and continuous through ``lam = 0`` (the GMO limit):

    S_PG  = e^{-lam G} * Gbar * r(lam Gbar) / r(lam)
    F_PG  = G * r(lam G) / r(lam)
    g_PG  = g * e^{-lam G} / r(lam)
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, replace as _dc_replace
from typing import Literal

import numpy as np
from scipy import optimize

from .baseline import Baseline, Exponential, check_support
from .errors import DomainError, ParameterError

__all__ = [
    "GMOPG",
    "SpecialCase",
    "CriticalKind",
    "CriticalPoint",
    "pg_survival",
    "pg_cdf",
    "pg_pdf",
    "reduce_special_case",
    "dlog_density",
    "dlog_hazard",
    "density_critical_points",
    "hazard_critical_points",
    "likelihood_ratio",
    "asymptotic_pdf",
    "asymptotic_cdf",
    "asymptotic_hazard",
    "genesis_sample",
]

# |lam| below this uses the series of r(x) instead of expm1 ratios
SMALL_LAMBDA = 1e-8
MAX_ABS_LAMBDA = 700.0


def _log_r(x):
    """log of r(x) = (1 - exp(-x)) / x, with r(0) = 1."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        # for x < 0, r(x) = exp(|x|) r(|x|); written this way it never overflows
        out = np.log(-np.expm1(-ax)) - np.log(ax) + np.where(x < 0, ax, 0.0)
    small = ax < SMALL_LAMBDA
    if np.any(small):
        out = np.where(small, np.log1p(-x / 2.0 + x * x / 6.0), out)
    return out


def _power_term(k, log_x):
    """k * log_x, with 0 * (-inf) taken as 0."""
    return k * log_x if k != 0 else np.zeros_like(log_x)


class _Parts:
    """Log-space building blocks of the model at a set of time points.

    ``log_S``/``log_F``/``log_gpg`` are the P-G survival, cdf and density;
    the P-G hazard ``log_gpg_over_S`` is computed on first use.
    """

    def __init__(self, lam: float, baseline: Baseline, t):
        t = check_support(t)
        self.lam, self.baseline, self.t = lam, baseline, t
        log_Gbar = baseline.logsf(t)
        self.Gbar = np.exp(log_Gbar)
        self.G = -np.expm1(log_Gbar)
        self.log_g = baseline.logpdf(t)
        self._lr_lam = _log_r(lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            self._lr_gbar = _log_r(lam * self.Gbar)
            self.log_S = -lam * self.G + log_Gbar + self._lr_gbar - self._lr_lam
            self.log_F = np.log(self.G) + _log_r(lam * self.G) - self._lr_lam
            self.log_gpg = self.log_g - lam * self.G - self._lr_lam

    @functools.cached_property
    def log_gpg_over_S(self):
        return self.baseline.loghazard(self.t) - self._lr_gbar


def _pg_parts(lam: float, baseline: Baseline, t) -> _Parts:
    return _Parts(lam, baseline, t)


def _require_nonzero(lam):
    if lam == 0:
        raise ParameterError("the Poisson-G family needs lam != 0; lam = 0 is only available as the GMO limit of GMOPG")


def pg_survival(lam: float, baseline: Baseline, t):
    """Poisson-G survival function (lam != 0)."""
    _require_nonzero(lam)
    return np.exp(_pg_parts(lam, baseline, t).log_S)


def pg_cdf(lam: float, baseline: Baseline, t):
    _require_nonzero(lam)
    return np.exp(_pg_parts(lam, baseline, t).log_F)


def pg_pdf(lam: float, baseline: Baseline, t):
    _require_nonzero(lam)
    return np.exp(_pg_parts(lam, baseline, t).log_gpg)


class SpecialCase(enum.Enum):
    MOP_G = "MOP-G"
    P_G = "P-G"
    GMO = "GMO"
    MO = "MO"


@dataclass(frozen=True)
class GMOPG:
    """A member of the GMOP-G family with a concrete baseline.

    Parameters
    ----------
    theta : float
        Shape parameter, ``theta > 0``.
    alpha : float
        Tilt parameter, ``alpha > 0``.
    lam : float
        Poisson rate, any real with ``|lam| <= 700``.  ``lam = 0`` gives the
        generalized Marshall-Olkin limit.
    baseline : Baseline
        The baseline distribution G.
    """

    theta: float
    alpha: float
    lam: float
    baseline: Baseline = Exponential(1.0)

    def __post_init__(self):
        for name in ("theta", "alpha"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be a positive finite number, got {v!r}")
        if not np.isfinite(self.lam) or abs(self.lam) > MAX_ABS_LAMBDA:
            raise ParameterError(f"lam must be finite with |lam| <= {MAX_ABS_LAMBDA}, got {self.lam!r}")
        if not isinstance(self.baseline, Baseline):
            raise ParameterError("baseline must be a Baseline instance")

    @property
    def params(self) -> tuple[float, ...]:
        """Full parameter vector (theta, alpha, lam, *baseline params)."""
        return (self.theta, self.alpha, self.lam) + self.baseline.params

    @classmethod
    def from_vector(cls, vector, baseline_type: type[Baseline] = Exponential) -> "GMOPG":
        theta, alpha, lam, *xi = (float(v) for v in vector)
        return cls(theta, alpha, lam, baseline_type(*xi))

    def replace(self, **changes) -> "GMOPG":
        return _dc_replace(self, **changes)

    def mirror(self) -> "GMOPG":
        """The other parameter point with the same distribution.

        The Poisson-G odds satisfy odds(-lam) = exp(-lam) * odds(lam), and the
        Marshall-Olkin step divides the odds by alpha, so
        (theta, alpha, lam) and (theta, alpha * exp(-lam), -lam) coincide.
        """
        return _dc_replace(self, alpha=float(self.alpha * np.exp(-self.lam)), lam=-self.lam)

    def canonical(self) -> "GMOPG":
        """Representative of the mirror pair with ``lam >= 0``."""
        return self.mirror() if self.lam < 0 else self

    # -- internal composition -------------------------------------------------

    def _parts(self, t) -> _Parts:
        return _pg_parts(self.lam, self.baseline, t)

    def _log_D(self, parts: _Parts):
        # D = 1 - (1 - alpha) S_PG = alpha S_PG + F_PG, both terms nonnegative
        return np.logaddexp(np.log(self.alpha) + parts.log_S, parts.log_F)

    # -- evaluation -------------------------------------------------------------

    def logsf(self, t):
        p = self._parts(t)
        return self.theta * (np.log(self.alpha) + p.log_S - self._log_D(p))

    def sf(self, t):
        return np.exp(self.logsf(t))

    def cdf(self, t):
        return -np.expm1(self.logsf(t))

    def logpdf(self, t):
        p = self._parts(t)
        return (
            np.log(self.theta)
            + self.theta * np.log(self.alpha)
            + p.log_gpg
            + _power_term(self.theta - 1.0, p.log_S)
            - (self.theta + 1.0) * self._log_D(p)
        )

    def pdf(self, t):
        return np.exp(self.logpdf(t))

    def loghazard(self, t):
        p = self._parts(t)
        return np.log(self.theta) + p.log_gpg_over_S - self._log_D(p)

    def hazard(self, t):
        return np.exp(self.loghazard(t))

    def quantile(self, p):
        """Inverse cdf, closed form through the baseline quantile."""
        p = np.asarray(p, dtype=float)
        if np.any(np.isnan(p)) or np.any(p <= 0) or np.any(p >= 1):
            raise DomainError("p must lie in the open interval (0, 1)")
        th, a, lam = self.theta, self.alpha, self.lam
        log_q = np.log1p(-p) / th
        q = np.exp(log_q)
        one_minus_q = -np.expm1(log_q)
        denom = a + (1.0 - a) * q
        S = q / denom
        F = a * one_minus_q / denom
        if abs(lam) < SMALL_LAMBDA:
            Gbar = S + lam * S * F / 2.0
            G = F - lam * S * F / 2.0
        else:
            Gbar = np.log1p(S * np.expm1(lam)) / lam
            G = -np.log1p(F * np.expm1(-lam)) / lam
        return self.baseline.invert(G, Gbar)

    ppf = quantile

    def sample(self, n: int, seed=None):
        """Draw ``n`` variates by inversion; ``seed`` is anything ``default_rng`` accepts."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        rng = np.random.default_rng(seed)
        # shifted so that u is never exactly 0 or 1
        u = rng.random(n) + 2.0**-54
        return self.quantile(u)

    rvs = sample


def reduce_special_case(params: GMOPG) -> SpecialCase | None:
    """The tightest named sub-model implied by exact parameter values."""
    if params.theta == 1 and params.lam == 0:
        return SpecialCase.MO
    if params.lam == 0:
        return SpecialCase.GMO
    if params.theta == 1 and params.alpha == 1:
        return SpecialCase.P_G
    if params.theta == 1:
        return SpecialCase.MOP_G
    return None


# -- shape analysis -----------------------------------------------------------


class CriticalKind(enum.Enum):
    LOCAL_MAX = "local maximum"
    LOCAL_MIN = "local minimum"
    INFLEXION = "inflexion"


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    kind: CriticalKind
    target: Literal["density", "hazard"]
    residual: float
    curvature: float


def _shape_terms(params: GMOPG, t):
    p = params._parts(t)
    g = np.exp(p.log_g)
    gpg_over_S = np.exp(p.log_gpg_over_S)
    gpg_over_D = np.exp(p.log_gpg - params._log_D(p))
    dlog_g = params.baseline.dlogpdf(t)
    return dlog_g, g, gpg_over_S, gpg_over_D


def dlog_density(params: GMOPG, t):
    """d/dt log f(t); its roots are the critical points of the density."""
    dlog_g, g, gs, gd = _shape_terms(params, t)
    th, lam = params.theta, params.lam
    return dlog_g - lam * g - (th - 1.0) * gs - (th + 1.0) * (1.0 - params.alpha) * gd


def dlog_hazard(params: GMOPG, t):
    """d/dt log h(t); its roots are the critical points of the hazard rate."""
    dlog_g, g, gs, gd = _shape_terms(params, t)
    return dlog_g - params.lam * g + gs - (1.0 - params.alpha) * gd


INFLEXION_TOL = 1e-6


def _critical_points(fn, params, interval, target, n_scan=512):
    lo, hi = interval
    if not 0 < lo < hi:
        raise DomainError("search interval must satisfy 0 < lo < hi")
    grid = np.geomspace(lo, hi, n_scan)
    vals = fn(params, grid)
    points = []
    for i in range(n_scan - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            root = grid[i]
        elif a * b < 0:
            root = optimize.brentq(lambda x: float(fn(params, x)), grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        else:
            continue
        residual = float(fn(params, root))
        h = 1e-5 * root
        curvature = float((fn(params, root + h) - fn(params, root - h)) / (2 * h))
        if abs(curvature) < INFLEXION_TOL:
            kind = CriticalKind.INFLEXION
        elif curvature < 0:
            kind = CriticalKind.LOCAL_MAX
        else:
            kind = CriticalKind.LOCAL_MIN
        points.append(CriticalPoint(float(root), kind, target, residual, curvature))
    return points


def density_critical_points(params: GMOPG, interval=(1e-6, 50.0)) -> list[CriticalPoint]:
    """Bracket and refine all sign changes of d/dt log f inside ``interval``."""
    return _critical_points(dlog_density, params, interval, "density")


def hazard_critical_points(params: GMOPG, interval=(1e-6, 50.0)) -> list[CriticalPoint]:
    return _critical_points(dlog_hazard, params, interval, "hazard")


# -- ordering and asymptotes ------------------------------------------------


def likelihood_ratio(x: GMOPG, y: GMOPG, t):
    """f_X(t) / f_Y(t) for two members differing only in ``alpha``."""
    if x.theta != y.theta or x.lam != y.lam or x.baseline != y.baseline:
        raise ParameterError("likelihood_ratio needs equal theta, lam and baseline")
    p = x._parts(t)
    log_ratio = x.theta * (np.log(x.alpha) - np.log(y.alpha)) + (x.theta + 1.0) * (y._log_D(p) - x._log_D(p))
    return np.exp(log_ratio)


def asymptotic_pdf(params: GMOPG, t, regime: Literal["small", "large"]):
    """Leading-order density as t -> 0 ("small") or t -> inf ("large")."""
    p = params._parts(t)
    lr = _log_r(params.lam)
    if regime == "small":
        return np.exp(np.log(params.theta) + p.log_g - np.log(params.alpha) - lr)
    if regime == "large":
        th = params.theta
        log_val = np.log(th) + th * np.log(params.alpha) - params.lam + p.log_g - lr + _power_term(th - 1.0, p.log_S)
        return np.exp(log_val)
    raise ValueError("regime must be 'small' or 'large'")


def asymptotic_cdf(params: GMOPG, t, regime: Literal["small", "large"]):
    p = params._parts(t)
    if regime == "small":
        return np.zeros_like(p.G)
    if regime == "large":
        return -np.expm1(params.theta * (np.log(params.alpha) + p.log_S))
    raise ValueError("regime must be 'small' or 'large'")


def asymptotic_hazard(params: GMOPG, t, regime: Literal["small", "large"]):
    if regime == "small":
        return asymptotic_pdf(params, t, "small")
    if regime == "large":
        p = params._parts(t)
        # theta * lam * e^{-lam} g / (e^{-lam G} - e^{-lam}) = theta * g_PG(G=1) / S_PG
        return np.exp(np.log(params.theta) - params.lam + p.log_g - _log_r(params.lam) - p.log_S)
    raise ValueError("regime must be 'small' or 'large'")


def genesis_sample(params: GMOPG, n: int, seed=None):
    """Draw from the min/max-of-geometric-many P-G construction.

    Requires an integer ``theta``.  For ``alpha <= 1`` each of the ``theta``
    groups is the minimum of N ~ Geometric(alpha) P-G draws; for ``alpha > 1``
    it is the maximum of N ~ Geometric(1/alpha) draws.  The result is the
    minimum over the groups.
    """
    k = int(round(params.theta))
    if k != params.theta or k < 1:
        raise ParameterError("the geometric construction needs a positive integer theta")
    rng = np.random.default_rng(seed)
    pg = params.replace(theta=1.0, alpha=1.0)
    use_min = params.alpha <= 1
    p_geom = params.alpha if use_min else 1.0 / params.alpha
    counts = rng.geometric(p_geom, size=(n, k)).ravel()
    draws = pg.quantile(rng.random(counts.sum()) + 2.0**-54)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    reduce = np.minimum if use_min else np.maximum
    groups = reduce.reduceat(draws, starts).reshape(n, k)
    return groups.min(axis=1)
