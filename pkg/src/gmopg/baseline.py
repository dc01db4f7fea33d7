"""Baseline lifetime distributions G(t) on (0, inf).

Every baseline exposes the same small surface used by the compound family:
``logpdf``, ``cdf``, ``sf``/``logsf`` (computed directly, not as ``1 - cdf``),
``quantile``/``isf`` and ``dlogpdf`` (the derivative g'(t)/g(t) needed for
critical points).  The Weibull is parameterized as G(t) = 1 - exp(-beta t**delta),
so ``rate`` multiplies ``t**shape`` rather than acting as a scale.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, ParameterError

__all__ = ["Baseline", "Exponential", "Weibull", "make_baseline", "check_support"]


def check_support(t):
    """Return ``t`` as a float array, raising if any value is not in (0, inf]."""
    t = np.asarray(t, dtype=float)
    if not np.all(t > 0):  # also catches NaN
        raise DomainError("time values must be strictly positive")
    return t


def _check_prob(p, name="p"):
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any(p <= 0) or np.any(p >= 1):
        raise DomainError(f"{name} must lie in the open interval (0, 1)")
    return p


class Baseline(abc.ABC):
    """Interface for a baseline distribution with support (0, inf)."""

    kind: str = ""

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{type(self).__name__}.{f.name} must be a positive finite number, got {value!r}")

    @property
    def params(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in fields(self))

    def replace(self, *values) -> "Baseline":
        return type(self)(*values)

    @abc.abstractmethod
    def logpdf(self, t): ...

    @abc.abstractmethod
    def logsf(self, t): ...

    @abc.abstractmethod
    def cdf(self, t): ...

    @abc.abstractmethod
    def quantile(self, p): ...

    @abc.abstractmethod
    def isf(self, q):
        """Inverse survival function, accurate for ``q`` close to 0."""

    @abc.abstractmethod
    def dlogpdf(self, t):
        """Derivative of ``log g(t)`` with respect to ``t``."""

    def loghazard(self, t):
        return self.logpdf(t) - self.logsf(t)

    def pdf(self, t):
        return np.exp(self.logpdf(t))

    def sf(self, t):
        return np.exp(self.logsf(t))

    def invert(self, G, Gbar):
        """Map a (cdf, survival) pair back to time, using whichever side is accurate."""
        G = np.asarray(G, dtype=float)
        Gbar = np.asarray(Gbar, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            H = np.where(G < 0.5, -np.log1p(-G), -np.log(Gbar))
        return self._inverse_cumhaz(H)

    @abc.abstractmethod
    def _inverse_cumhaz(self, H): ...


@dataclass(frozen=True)
class Exponential(Baseline):
    """Exponential baseline, g(t) = rate * exp(-rate t)."""

    rate: float
    kind = "exponential"

    def logpdf(self, t):
        t = check_support(t)
        return np.log(self.rate) - self.rate * t

    def logsf(self, t):
        t = check_support(t)
        return -self.rate * t

    def cdf(self, t):
        t = check_support(t)
        return -np.expm1(-self.rate * t)

    def loghazard(self, t):
        t = check_support(t)
        return np.full_like(t, np.log(self.rate))

    def dlogpdf(self, t):
        t = check_support(t)
        return np.full_like(t, -self.rate)

    def _inverse_cumhaz(self, H):
        return H / self.rate

    def quantile(self, p):
        p = _check_prob(p)
        return -np.log1p(-p) / self.rate

    def isf(self, q):
        q = _check_prob(q, "q")
        return -np.log(q) / self.rate


@dataclass(frozen=True)
class Weibull(Baseline):
    """Weibull baseline, G(t) = 1 - exp(-rate * t**shape)."""

    rate: float
    shape: float
    kind = "weibull"

    def _cumhaz(self, t):
        return self.rate * t**self.shape

    def logpdf(self, t):
        t = check_support(t)
        return np.log(self.rate * self.shape) + (self.shape - 1.0) * np.log(t) - self._cumhaz(t)

    def logsf(self, t):
        t = check_support(t)
        return -self._cumhaz(t)

    def cdf(self, t):
        t = check_support(t)
        return -np.expm1(-self._cumhaz(t))

    def loghazard(self, t):
        t = check_support(t)
        return np.log(self.rate * self.shape) + (self.shape - 1.0) * np.log(t)

    def dlogpdf(self, t):
        t = check_support(t)
        return (self.shape - 1.0) / t - self.rate * self.shape * t ** (self.shape - 1.0)

    def _inverse_cumhaz(self, H):
        return (H / self.rate) ** (1.0 / self.shape)

    def quantile(self, p):
        p = _check_prob(p)
        return self._inverse_cumhaz(-np.log1p(-p))

    def isf(self, q):
        q = _check_prob(q, "q")
        return self._inverse_cumhaz(-np.log(q))


_BASELINES = {"exponential": Exponential, "weibull": Weibull}


def make_baseline(kind: str, *params: float) -> Baseline:
    """Build a baseline from its kind name ("exponential" or "weibull")."""
    try:
        cls = _BASELINES[kind.lower()]
    except KeyError:
        raise ParameterError(f"unknown baseline kind {kind!r}") from None
    return cls(*params)
