"""Model catalogue for likelihood fitting.

Every model is described by the names of its free parameters.  Parameters
that a sub-model does not estimate take their reduction values (``theta = 1``,
``alpha = 1``, ``lam = 0``, ``delta = 1``), so a model nests inside any other
whose parameter names are a superset of its own.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..baseline import Exponential, Weibull, check_support, _check_prob
from ..errors import ParameterError
from ..family import GMOPG

__all__ = ["ModelTag", "ModelConfig", "MomentExponential", "PARAMETERS", "build_distribution", "natural_values"]


class ModelTag(str, enum.Enum):
    EXP = "exp"
    ME = "me"
    P_E = "p-e"
    MO_E = "mo-e"
    GMO_E = "gmo-e"
    MOP_E = "mop-e"
    GMOP_E = "gmop-e"
    GMOP_W = "gmop-w"

    @classmethod
    def parse(cls, value) -> "ModelTag":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for tag in cls:
            if key in (tag.value, tag.value.replace("-", "")):
                return tag
        raise ParameterError(f"unknown model {value!r}; choose from {', '.join(t.value for t in cls)}")

    @property
    def param_names(self) -> tuple[str, ...]:
        return _FREE[self]

    @property
    def label(self) -> str:
        return _LABELS[self]


_FREE = {
    ModelTag.EXP: ("beta",),
    ModelTag.ME: ("beta",),
    ModelTag.P_E: ("lam", "beta"),
    ModelTag.MO_E: ("alpha", "beta"),
    ModelTag.GMO_E: ("theta", "alpha", "beta"),
    ModelTag.MOP_E: ("alpha", "lam", "beta"),
    ModelTag.GMOP_E: ("theta", "alpha", "lam", "beta"),
    ModelTag.GMOP_W: ("theta", "alpha", "lam", "beta", "delta"),
}

_LABELS = {
    ModelTag.EXP: "Exp",
    ModelTag.ME: "ME",
    ModelTag.P_E: "P-E",
    ModelTag.MO_E: "MO-E",
    ModelTag.GMO_E: "GMO-E",
    ModelTag.MOP_E: "MOP-E",
    ModelTag.GMOP_E: "GMOP-E",
    ModelTag.GMOP_W: "GMOP-W",
}

REDUCTION_VALUES = {"theta": 1.0, "alpha": 1.0, "lam": 0.0, "delta": 1.0}


@dataclass(frozen=True)
class ParameterInfo:
    """How one parameter is optimized.

    ``log`` parameters are searched on the log scale.  ``bounds`` is the box in
    natural units and ``start_range`` the Latin-hypercube range for multistarts.
    For ``beta`` both are rescaled by the data: by ``1 / mean`` where it is a
    rate and by ``mean`` where it is a scale (the moment exponential).
    """

    log: bool
    bounds: tuple[float, float]
    start_range: tuple[float, float]
    data_scaled: bool = False


PARAMETERS = {
    "theta": ParameterInfo(True, (1e-4, 1e4), (0.05, 50.0)),
    "alpha": ParameterInfo(True, (1e-4, 1e4), (0.05, 50.0)),
    "lam": ParameterInfo(False, (-60.0, 60.0), (-10.0, 10.0)),
    "beta": ParameterInfo(True, (1e-6, 1e6), (0.05, 10.0), data_scaled=True),
    "delta": ParameterInfo(True, (0.02, 50.0), (0.2, 5.0)),
}


@dataclass(frozen=True)
class MomentExponential:
    """Length-biased exponential, f(t) = t exp(-t/scale) / scale**2."""

    scale: float

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ParameterError("scale must be a positive finite number")

    def logpdf(self, t):
        t = check_support(t)
        return np.log(t) - t / self.scale - 2.0 * np.log(self.scale)

    def pdf(self, t):
        return np.exp(self.logpdf(t))

    def logsf(self, t):
        z = check_support(t) / self.scale
        return np.log1p(z) - z

    def sf(self, t):
        return np.exp(self.logsf(t))

    def cdf(self, t):
        return -np.expm1(self.logsf(t))

    def quantile(self, p):
        return stats.gamma.ppf(_check_prob(p), 2.0, scale=self.scale)

    def sample(self, n: int, seed=None):
        rng = np.random.default_rng(seed)
        return self.quantile(rng.random(n) + 2.0**-54)


@dataclass(frozen=True)
class ModelConfig:
    """What to fit and how.

    ``fixed`` pins free parameters of ``tag`` to given values; ``bounds``
    overrides the default box of individual parameters (in natural units, not
    rescaled by the data).  ``n_starts`` Latin hypercube starts are added to a
    data-informed start and any ``extra_starts`` (dicts of natural values).  The best screened
    start is polished to ``xatol``/``fatol`` and restarted at most
    ``max_restarts`` times.
    """

    tag: ModelTag = ModelTag.GMOP_E
    fixed: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    n_starts: int = 16
    max_iter: int = 10_000
    xatol: float = 1e-8
    fatol: float = 1e-10
    max_restarts: int = 5
    seed: int = 0
    extra_starts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tag", ModelTag.parse(self.tag))
        names = self.tag.param_names
        for key in self.fixed:
            if key not in names:
                raise ParameterError(f"{key!r} is not a parameter of {self.tag.label}")
        for key, (lo, hi) in self.bounds.items():
            if key not in names:
                raise ParameterError(f"{key!r} is not a parameter of {self.tag.label}")
            if not lo < hi:
                raise ParameterError(f"bounds for {key!r} must satisfy lower < upper")
        if not self.free_names:
            raise ParameterError("at least one parameter must be free")
        if self.n_starts < 0 or self.max_restarts < 0:
            raise ParameterError("n_starts and max_restarts must be nonnegative")

    @property
    def free_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.tag.param_names if n not in self.fixed)

    def box(self, name: str, data_scale: float = 1.0) -> tuple[float, float]:
        if name in self.bounds:
            return tuple(self.bounds[name])
        info = PARAMETERS[name]
        lo, hi = info.bounds
        return (lo * data_scale, hi * data_scale) if info.data_scaled else (lo, hi)


def build_distribution(tag, values: dict):
    """Distribution object for ``tag`` with the given natural parameter values."""
    tag = ModelTag.parse(tag)
    if tag is ModelTag.ME:
        return MomentExponential(values["beta"])
    full = {**REDUCTION_VALUES, **values}
    baseline = Weibull(full["beta"], full["delta"]) if tag is ModelTag.GMOP_W else Exponential(full["beta"])
    return GMOPG(full["theta"], full["alpha"], full["lam"], baseline)


def natural_values(tag, dist) -> dict:
    """Inverse of :func:`build_distribution` for the parameters ``tag`` estimates."""
    tag = ModelTag.parse(tag)
    if tag is ModelTag.ME:
        return {"beta": dist.scale}
    full = {"theta": dist.theta, "alpha": dist.alpha, "lam": dist.lam, "beta": dist.baseline.rate}
    if isinstance(dist.baseline, Weibull):
        full["delta"] = dist.baseline.shape
    return {name: float(full[name]) for name in tag.param_names}
