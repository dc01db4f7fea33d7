"""Maximum-likelihood fitting, observed information and information criteria."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from ..baseline import check_support
from ..errors import ConvergenceError, DomainError, GmopgError, NotPositiveDefiniteError
from .diagnostics import GofStatistics, gof_statistics
from .models import PARAMETERS, REDUCTION_VALUES, ModelConfig, ModelTag, build_distribution, natural_values

__all__ = [
    "log_likelihood",
    "fit",
    "compare_models",
    "observed_information",
    "standard_errors",
    "information_criteria",
    "FitResult",
    "Convergence",
    "Criteria",
]

Z95 = 1.959963984540054


def _as_data(data):
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise DomainError("data must not be empty")
    return check_support(data)


def log_likelihood(dist, data) -> float:
    """Sum of log densities; ``-inf`` when any term is undefined."""
    data = _as_data(data)
    with np.errstate(all="ignore"):
        value = float(np.sum(dist.logpdf(data)))
    return value if np.isfinite(value) else -np.inf


# -- information criteria ---------------------------------------------------------


@dataclass(frozen=True)
class Criteria:
    aic: float
    bic: float
    caic: float
    hqic: float

    def as_dict(self):
        return {"AIC": self.aic, "BIC": self.bic, "CAIC": self.caic, "HQIC": self.hqic}


def information_criteria(loglik: float, k: int, n: int) -> Criteria:
    if n <= 1 or k < 1:
        raise DomainError("information criteria need n > 1 and k >= 1")
    dev = -2.0 * loglik
    log_n = np.log(n)
    return Criteria(dev + 2 * k, dev + k * log_n, dev + k * (log_n + 1), dev + 2 * k * np.log(log_n))


# -- observed information ----------------------------------------------------------


def _hessian(fn, x, steps):
    k = x.size
    f0 = fn(x)
    H = np.empty((k, k))
    E = np.diag(steps)
    for i in range(k):
        H[i, i] = (fn(x + E[i]) - 2 * f0 + fn(x - E[i])) / steps[i] ** 2
        for j in range(i):
            H[i, j] = H[j, i] = (
                fn(x + E[i] + E[j]) - fn(x + E[i] - E[j]) - fn(x - E[i] + E[j]) + fn(x - E[i] - E[j])
            ) / (4 * steps[i] * steps[j])
    return 0.5 * (H + H.T)


def _natural_loglik(tag, names, fixed, data):
    def fn(x):
        try:
            return log_likelihood(build_distribution(tag, {**fixed, **dict(zip(names, x))}), data)
        except GmopgError:
            return -np.inf

    return fn


def _infer_tag(dist):
    if hasattr(dist, "scale"):
        return ModelTag.ME
    return ModelTag.GMOP_W if dist.baseline.kind == "weibull" else ModelTag.GMOP_E


def observed_information(dist, data, tag=None, fixed=None) -> np.ndarray:
    """Negative Hessian of the log-likelihood in natural parameters.

    Central differences with step ``1e-4 * max(|rho_i|, 1)`` for each free
    parameter of ``tag`` (inferred from ``dist`` when omitted), symmetrized.
    """
    data = _as_data(data)
    tag = _infer_tag(dist) if tag is None else ModelTag.parse(tag)
    fixed = dict(fixed or {})
    values = natural_values(tag, dist)
    names = [n for n in tag.param_names if n not in fixed]
    fixed = {**fixed, **{n: v for n, v in values.items() if n in fixed}}
    x = np.array([values[n] for n in names])
    steps = 1e-4 * np.maximum(np.abs(x), 1.0)
    info = -_hessian(_natural_loglik(tag, names, fixed, data), x, steps)
    if not np.all(np.isfinite(info)):
        raise DomainError("observed information has non-finite entries; the estimate may sit on the support boundary")
    return info


def standard_errors(info) -> np.ndarray:
    """Square roots of the diagonal of ``inv(info)``."""
    info = np.atleast_2d(np.asarray(info, dtype=float))
    eig = np.linalg.eigvalsh(info)
    message = f"information matrix is not positive definite (smallest eigenvalue {eig.min():.6g})"
    if not np.all(eig > 0):
        raise NotPositiveDefiniteError(message, eig)
    try:
        chol_inv = np.linalg.inv(np.linalg.cholesky(info))
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(message, eig) from None
    # diag(inv(info)) as column sums of squares, nonnegative by construction
    return np.sqrt(np.sum(chol_inv**2, axis=0))


# -- fitting -------------------------------------------------------------------------


@dataclass(frozen=True)
class Convergence:
    converged: bool
    iterations: int
    restarts: int
    gradient_norm: float
    starts: int
    failed_starts: int
    message: str = ""


@dataclass
class FitResult:
    """Outcome of one maximum-likelihood fit.

    ``estimates``, ``standard_errors`` and ``ci95`` are keyed by parameter name
    and cover the free parameters only; ``fixed`` holds the pinned ones.
    Standard errors are NaN when the observed information is not positive definite.
    """

    tag: ModelTag
    estimates: dict
    fixed: dict
    standard_errors: dict
    ci95: dict
    loglik: float
    criteria: Criteria
    gof: GofStatistics | None
    convergence: Convergence
    n: int
    information: np.ndarray | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.estimates)

    @property
    def distribution(self):
        return build_distribution(self.tag, {**self.fixed, **self.estimates})


class _Problem:
    """Negative log-likelihood on the optimizer's (log-transformed) scale."""

    def __init__(self, data, config: ModelConfig):
        self.data = data
        self.config = config
        self.tag = config.tag
        self.names = config.free_names
        mean = float(np.mean(data))
        self.beta_scale = mean if self.tag is ModelTag.ME else 1.0 / mean
        self.logs = np.array([PARAMETERS[n].log for n in self.names])
        boxes = [config.box(n, self.beta_scale) for n in self.names]
        self.lower = self.to_z(np.array([b[0] for b in boxes]))
        self.upper = self.to_z(np.array([b[1] for b in boxes]))

    def to_z(self, x):
        return np.where(self.logs, np.log(np.maximum(x, 1e-300)), x)

    def to_x(self, z):
        return np.where(self.logs, np.exp(z), z)

    def values(self, z):
        return {**self.config.fixed, **dict(zip(self.names, self.to_x(z)))}

    def __call__(self, z):
        try:
            ll = log_likelihood(build_distribution(self.tag, self.values(z)), self.data)
        except GmopgError:
            return np.inf
        return -ll if np.isfinite(ll) else np.inf

    def clip(self, z):
        return np.clip(z, self.lower, self.upper)

    def starts(self):
        """Data-informed start, user extra starts, then a Latin hypercube."""
        # moment-matching beta: rate 1/mean for the exponential, scale mean/2 for ME
        beta = self.beta_scale / 2 if self.tag is ModelTag.ME else self.beta_scale
        base = {**REDUCTION_VALUES, "beta": beta}
        out = [self.to_z(np.array([base[n] if n != "lam" else 0.1 for n in self.names]))]
        for extra in self.config.extra_starts:
            merged = {**base, **extra}
            out.append(self.to_z(np.array([merged[n] for n in self.names], dtype=float)))
        if self.config.n_starts:
            sampler = qmc.LatinHypercube(d=len(self.names), seed=self.config.seed)
            cube = sampler.random(self.config.n_starts)
            lo, hi = [], []
            for n in self.names:
                a, b = PARAMETERS[n].start_range
                if PARAMETERS[n].data_scaled:
                    a, b = a * self.beta_scale, b * self.beta_scale
                lo.append(a)
                hi.append(b)
            lo, hi = self.to_z(np.array(lo)), self.to_z(np.array(hi))
            out.extend(lo + cube * (hi - lo))
        return [self.clip(z) for z in out]


def _nelder_mead(problem, z0, xatol, fatol, maxiter):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return optimize.minimize(
            problem,
            z0,
            method="Nelder-Mead",
            bounds=list(zip(problem.lower, problem.upper)),
            options={"xatol": xatol, "fatol": fatol, "maxiter": maxiter, "maxfev": 2 * maxiter, "adaptive": len(z0) > 2},
        )


SCREEN_XATOL = 1e-4
SCREEN_MAXITER = 2000


def fit(data, config: ModelConfig | str = ModelConfig()) -> FitResult:
    """Maximum-likelihood fit by multistart Nelder-Mead.

    Every start is first run to a loose tolerance; the best one is then
    polished with the configured tolerance and restarted from its own optimum
    until the log-likelihood stops improving.  Deterministic given the config.

    When both ``alpha`` and ``lam`` are free the reported estimate is the
    ``lam >= 0`` member of the mirror pair (see :meth:`GMOPG.mirror`).
    """
    data = _as_data(data)
    if not isinstance(config, ModelConfig):
        config = ModelConfig(tag=config)
    problem = _Problem(data, config)

    screened, diagnostics = [], []
    for index, z0 in enumerate(problem.starts()):
        if not np.isfinite(problem(z0)):
            diagnostics.append({"start": index, "status": "infeasible start"})
            continue
        res = _nelder_mead(problem, z0, SCREEN_XATOL, 1e-8, SCREEN_MAXITER)
        diagnostics.append({"start": index, "status": res.message, "negloglik": float(res.fun), "nit": int(res.nit)})
        if np.isfinite(res.fun):
            screened.append((float(res.fun), index, res))
    if not screened:
        raise ConvergenceError(f"every start failed for {config.tag.label}", diagnostics)

    _, _, best = min(screened, key=lambda item: (item[0], item[1]))
    iterations = int(best.nit)
    restarts = 0
    current = _nelder_mead(problem, best.x, config.xatol, config.fatol, config.max_iter)
    iterations += int(current.nit)
    if current.fun > best.fun:
        current = best
    while restarts < config.max_restarts:
        again = _nelder_mead(problem, current.x, config.xatol, config.fatol, config.max_iter)
        iterations += int(again.nit)
        restarts += 1
        improved = current.fun - again.fun
        if again.fun <= current.fun:
            current = again
        if improved <= 1e-9:
            break

    estimates = _canonical(dict(zip(problem.names, map(float, problem.to_x(current.x)))))
    return _finish(data, config, estimates, converged=bool(current.success), iterations=iterations,
                   restarts=restarts, starts=len(diagnostics), failed=len(diagnostics) - len(screened),
                   message=str(current.message))


def _canonical(estimates: dict) -> dict:
    # (alpha, lam) and (alpha * exp(-lam), -lam) give the same distribution;
    # report the lam >= 0 member when both are free
    if "alpha" in estimates and "lam" in estimates and estimates["lam"] < 0:
        lam = estimates["lam"]
        estimates = {**estimates, "alpha": estimates["alpha"] * float(np.exp(-lam)), "lam": -lam}
    return estimates


def _gradient_norm(fn, x):
    steps = 1e-6 * np.maximum(np.abs(x), 1.0)
    grad = [(fn(x + h * e) - fn(x - h * e)) / (2 * h) for h, e in zip(steps, np.eye(x.size))]
    return float(np.linalg.norm(grad))


def _finish(data, config, estimates, *, converged, iterations, restarts, starts, failed, message) -> FitResult:
    tag = config.tag
    fixed = dict(config.fixed)
    dist = build_distribution(tag, {**fixed, **estimates})
    ll = log_likelihood(dist, data)
    names = list(estimates)
    x = np.array([estimates[n] for n in names])
    grad = _gradient_norm(_natural_loglik(tag, names, fixed, data), x)

    info = None
    se = np.full(len(names), np.nan)
    try:
        info = observed_information(dist, data, tag, fixed)
        se = standard_errors(info)
    except (NotPositiveDefiniteError, DomainError):
        pass
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            gof = gof_statistics(dist, data)
    except GmopgError:
        gof = None

    return FitResult(
        tag=tag,
        estimates=estimates,
        fixed=fixed,
        standard_errors=dict(zip(names, map(float, se))),
        ci95={n: (float(v - Z95 * s), float(v + Z95 * s)) for n, v, s in zip(names, x, se)},
        loglik=ll,
        criteria=information_criteria(ll, len(names), data.size),
        gof=gof,
        convergence=Convergence(converged and np.isfinite(ll), iterations, restarts, grad, starts, failed, message),
        n=int(data.size),
        information=info,
    )


def _nested_in(sub: ModelTag, parent: ModelTag) -> bool:
    if ModelTag.ME in (sub, parent) or sub is parent:
        return False
    return set(sub.param_names) < set(parent.param_names)


def compare_models(data, tags, *, failures: dict | None = None, **config_options) -> list[FitResult]:
    """Fit several models and return them sorted by AIC.

    Smaller nested models are fitted first and their optima are handed to every
    model that contains them as extra starts, so a larger model never reports a
    lower log-likelihood than a sub-model it nests.  When ``failures`` is a
    dict, a model whose every start fails is recorded there (tag -> error)
    instead of raising.
    """
    tags = sorted({ModelTag.parse(t) for t in tags}, key=lambda t: (len(t.param_names), list(ModelTag).index(t)))
    results: dict[ModelTag, FitResult] = {}
    for tag in tags:
        extra = tuple(r.estimates for sub, r in results.items() if _nested_in(sub, tag))
        try:
            results[tag] = fit(data, ModelConfig(tag=tag, extra_starts=extra, **config_options))
        except ConvergenceError as err:
            if failures is None:
                raise
            failures[tag] = err
    return sorted(results.values(), key=lambda r: (r.criteria.aic, list(ModelTag).index(r.tag)))
