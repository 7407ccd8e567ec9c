"""Maximum-likelihood fitting, observed information and model comparison."""
import logging
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.stats import norm

from .data import ParameterVector
from .likelihood import gradient, log_likelihood
from .models import ModelVariant, link_weights

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised when a dataset or configuration cannot support a fit."""


class InformationMatrixError(np.linalg.LinAlgError):
    def __init__(self, smallest_eigenvalue):
        self.smallest_eigenvalue = float(smallest_eigenvalue)
        super().__init__(
            f"observed information is not positive definite "
            f"(smallest eigenvalue {self.smallest_eigenvalue:.3e})"
        )


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-5
    relative_tolerance: float = 1e-10
    stationarity_tolerance: float = 1e-3
    restarts: int = 3
    seed: int = 0
    armijo: float = 1e-4
    jitter_scale: float = 0.5
    weibull_bound: float = 50.0
    gradient_step: float = 1e-6
    hessian_step: float = 1e-4

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**mapping)


@dataclass
class FitResult:
    variant: ModelVariant
    estimates: ParameterVector
    std_errors: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    log_lik: float
    aic: float
    bic: float
    converged: bool
    iterations: int
    underflow_rows: int
    hessian_condition: float
    n: int
    level: float = 0.95
    covariance: np.ndarray = None
    final_gradient: np.ndarray = None
    names: list = field(default_factory=list)
    bound_hit: bool = False
    message: str = ""

    @property
    def k(self):
        return len(self.estimates)

    @property
    def z_ratios(self):
        values = self.estimates.to_array()
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(values) / self.std_errors

    @property
    def labels(self):
        return self.estimates.labels(self.names or None)

    def weights(self, x, x_cure=None):
        return link_weights(x, self.estimates.coeffs, x_cure)


# --- optimizer --------------------------------------------------------------------


@dataclass
class _Outcome:
    x: np.ndarray
    value: float
    grad: np.ndarray
    iterations: int
    converged: bool
    bound_hit: bool
    message: str


def _within_bounds(x, bounded, bound):
    return np.all(np.abs(x[bounded]) <= bound)


def _at_bound(x, bounded, bound):
    return bool(np.any(np.abs(x[bounded]) >= 0.99 * bound))


def bfgs_maximize(func, grad, x0, config=OptimizerConfig(), bounded=None, n_obs=1):
    """Maximize ``func`` with BFGS and Armijo backtracking.

    Converges when ``max|grad| < gradient_tolerance * max(1, |f| / n_obs)``, or
    when an iteration changes ``f`` by less than
    ``relative_tolerance * max(1, |f|)`` while ``max|grad|`` is already below
    ``stationarity_tolerance * max(1, |f| / n_obs)``.
    Coordinates flagged in ``bounded`` are kept within ``+-weibull_bound``;
    trial points outside are backtracked. ``bound_hit`` reports a bounded
    coordinate that finished within 1% of the bound.
    """
    x = np.asarray(x0, dtype=float).copy()
    bounded = np.zeros(x.size, bool) if bounded is None else np.asarray(bounded, bool)
    f = func(x)
    g = grad(x)

    def done(iterations, converged, message):
        return _Outcome(x, f, g, iterations, converged, _at_bound(x, bounded, config.weibull_bound), message)

    if not np.isfinite(f):
        return done(0, False, "objective not finite at start")
    inv_h = np.eye(x.size)
    first_update = True

    for it in range(1, config.max_iterations + 1):
        scale = max(1.0, abs(f) / n_obs)
        if np.max(np.abs(g)) < config.gradient_tolerance * scale:
            return done(it - 1, True, "gradient tolerance reached")

        # ascent direction for maximization
        d = inv_h @ g
        slope = g @ d
        if not slope > 0:
            inv_h = np.eye(x.size)
            d = g.copy()
            slope = g @ d

        step = 1.0
        while True:
            x_new = x + step * d
            if _within_bounds(x_new, bounded, config.weibull_bound):
                f_new = func(x_new)
                if np.isfinite(f_new) and f_new >= f + config.armijo * step * slope:
                    break
            step *= 0.5
            if step < 1e-20:
                return done(it, False, "line search failed")

        g_new = grad(x_new)
        s = x_new - x
        # minimization convention: y is the change in the gradient of -f
        y = g - g_new
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_update:
                inv_h = np.eye(x.size) * (sy / (y @ y))
                first_update = False
            rho = 1.0 / sy
            hy = inv_h @ y
            inv_h = (
                inv_h
                - rho * (np.outer(s, hy) + np.outer(hy, s))
                + (rho * rho * (y @ hy) + rho) * np.outer(s, s)
            )

        change = abs(f_new - f)
        x, f, g = x_new, f_new, g_new
        stationary = np.max(np.abs(g)) < config.stationarity_tolerance * max(1.0, abs(f) / n_obs)
        if stationary and change < config.relative_tolerance * max(1.0, abs(f)):
            return done(it, True, "relative tolerance reached")

    converged = np.max(np.abs(g)) < config.gradient_tolerance * max(1.0, abs(f) / n_obs)
    return done(config.max_iterations, converged, "iteration limit")


# --- information matrix -----------------------------------------------------------


def numerical_hessian(func, values, rel_step=1e-4):
    """Hessian of ``func`` by central differences of a central-difference gradient.

    Both levels use the step ``rel_step * max(1, |x_j|)``, which gives the
    four-point stencil off the diagonal and a ``2h`` second difference on it.
    The result is symmetric by construction.
    """
    x = np.asarray(values, dtype=float)
    k = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    f0 = func(x)
    hess = np.empty((k, k))

    def shifted(i, si, j=None, sj=0.0):
        z = x.copy()
        z[i] += si
        if j is not None:
            z[j] += sj
        return func(z)

    for i in range(k):
        hess[i, i] = (shifted(i, 2 * h[i]) - 2.0 * f0 + shifted(i, -2 * h[i])) / (4.0 * h[i] ** 2)
        for j in range(i + 1, k):
            val = (
                shifted(i, h[i], j, h[j])
                - shifted(i, h[i], j, -h[j])
                - shifted(i, -h[i], j, h[j])
                + shifted(i, -h[i], j, -h[j])
            ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return 0.5 * (hess + hess.T)


def observed_information(data, params, variant=ModelVariant.ZIPCR, rel_step=1e-4):
    """Negative Hessian of the log-likelihood, checked for positive definiteness.

    Raises
    ------
    InformationMatrixError
        If the matrix has a nonpositive eigenvalue; carries the smallest one.
    """
    variant = ModelVariant.parse(variant)
    values = params.to_array() if isinstance(params, ParameterVector) else np.asarray(params, float)
    info = -numerical_hessian(lambda v: log_likelihood(data, v, variant), values, rel_step)
    check_positive_definite(info)
    return info


def check_positive_definite(matrix):
    eig = np.linalg.eigvalsh(matrix)
    if not np.all(np.isfinite(eig)) or eig[0] <= 0:
        raise InformationMatrixError(eig[0] if np.isfinite(eig[0]) else np.nan)
    return eig


def covariance_from_information(info):
    cov = np.linalg.inv(info)
    return 0.5 * (cov + cov.T)


# --- Wald machinery and information criteria ----------------------------------------


def normal_quantile(level):
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    return float(norm.ppf(1.0 - (1.0 - level) / 2.0))


def wald_interval(est, se, level=0.95):
    """Symmetric normal-approximation interval ``est +- z * se``."""
    if se < 0:
        raise ValueError("standard error must be nonnegative")
    z = normal_quantile(level)
    return est - z * se, est + z * se


def wald_z(est, se):
    if not se > 0:
        raise ValueError("standard error must be positive")
    return abs(est) / se


def information_criteria(log_lik, k, n):
    """Return ``(aic, bic)`` = ``(-2 ll + 2k, -2 ll + k log n)``."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be at least 1")
    return -2.0 * log_lik + 2.0 * k, -2.0 * log_lik + k * np.log(n)


# --- fitting ----------------------------------------------------------------------


def check_fittable(data):
    zero = data.time == 0
    if not np.any((~zero) & (data.event == 1)):
        raise ConfigError("dataset needs at least one observed event with positive time")
    if not np.any((~zero) & (data.event == 0)):
        raise ConfigError("dataset needs at least one censored observation")
    for label, design in (("zero", data.design_zero()), ("cure", data.design_cure())):
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise ConfigError(f"{label}-part design matrix (with intercept) is rank deficient")


def initial_parameters(data):
    """Moment-matching start: logit-type intercepts from observed zero and censored shares."""
    n = data.n
    zero = data.time == 0
    lo, hi = 0.5 / n, 1.0 - 0.5 / n
    zbar = np.clip(zero.mean(), lo, hi)
    cbar = np.clip(((~zero) & (data.event == 0)).mean(), lo, hi)
    p = data.q + 1
    values = np.zeros(2 * p + 2)
    values[0] = np.log(zbar / (1.0 - zbar))
    values[p] = np.log(cbar / (1.0 - cbar))
    values[2 * p + 1] = np.log(np.median(data.time[~zero]))
    return ParameterVector.from_array(values)


def _optimize(data, variant, x0, config):
    p = data.q + 1
    bounded = np.zeros(2 * p + 2, bool)
    bounded[2 * p :] = True

    def objective(v):
        return log_likelihood(data, v, variant)

    def score(v):
        return gradient(data, v, variant, rel_step=config.gradient_step)

    return bfgs_maximize(objective, score, x0, config, bounded, n_obs=data.n)


def fit(data, variant=ModelVariant.ZIPCR, init=None, config=None, level=0.95):
    """Fit a ZIPCR or ZICR regression by maximum likelihood.

    Parameters
    ----------
    data : Dataset
    variant : ModelVariant or str
    init : ParameterVector, optional
        Starting point; defaults to :func:`initial_parameters`.
    config : OptimizerConfig or mapping, optional
    level : float
        Confidence level for the Wald intervals.

    Returns
    -------
    FitResult
        ``converged`` is False if every start failed the stopping rules or the
        observed information at the optimum is not positive definite.
    """
    variant = ModelVariant.parse(variant)
    if config is None:
        config = OptimizerConfig()
    elif not isinstance(config, OptimizerConfig):
        config = OptimizerConfig.from_mapping(dict(config))
    check_fittable(data)

    start = (init if init is not None else initial_parameters(data)).to_array()
    outcomes = [_optimize(data, variant, start, config)]
    if not outcomes[0].converged:
        rng = np.random.default_rng(config.seed)
        for r in range(config.restarts):
            jittered = start + rng.normal(0.0, config.jitter_scale, start.size)
            log.info("restart %d from jittered start", r + 1)
            outcomes.append(_optimize(data, variant, jittered, config))
            if outcomes[-1].converged:
                break
    converged_runs = [o for o in outcomes if o.converged]
    pool = converged_runs or outcomes
    best = max(pool, key=lambda o: o.value)
    iterations = sum(o.iterations for o in outcomes)

    estimates = ParameterVector.from_array(best.x)
    log_lik, floored = log_likelihood(data, best.x, variant, return_floored=True)
    k = len(estimates)
    aic, bic = information_criteria(log_lik, k, data.n)

    converged = best.converged
    message = best.message
    nan = np.full(k, np.nan)
    std_errors, cov, cond = nan.copy(), None, np.nan
    try:
        info = observed_information(data, best.x, variant, rel_step=config.hessian_step)
        cov = covariance_from_information(info)
        std_errors = np.sqrt(np.diag(cov))
        cond = float(np.linalg.cond(info))
    except InformationMatrixError as exc:
        converged = False
        message = f"{message}; {exc}"

    z = normal_quantile(level)
    return FitResult(
        variant=variant,
        estimates=estimates,
        std_errors=std_errors,
        ci_lower=best.x - z * std_errors,
        ci_upper=best.x + z * std_errors,
        log_lik=log_lik,
        aic=float(aic),
        bic=float(bic),
        converged=bool(converged),
        iterations=iterations,
        underflow_rows=int(floored),
        hessian_condition=cond,
        n=data.n,
        level=level,
        covariance=cov,
        final_gradient=best.grad,
        names=list(data.names),
        bound_hit=best.bound_hit,
        message=message,
    )


def group_outcomes(fit_or_params, group_covariates):
    """Mixture weights for each covariate pattern at the given estimates.

    ``group_covariates`` items are covariate vectors shared by both parts, or
    ``(x_zero, x_cure)`` pairs.
    """
    params = fit_or_params.estimates if isinstance(fit_or_params, FitResult) else fit_or_params
    out = []
    for item in group_covariates:
        if isinstance(item, tuple) and len(item) == 2 and np.ndim(item[0]) == 1:
            out.append(link_weights(item[0], params.coeffs, item[1]))
        else:
            out.append(link_weights(item, params.coeffs))
    return out
