"""Synthetic portfolios drawn from the ZIPCR / ZICR data-generating process."""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .data import Dataset, ParameterVector
from .models import THETA_LIMIT, ModelVariant, link_weights, susceptible_survival
from .weibull import DomainError, weibull_ppf


@dataclass(frozen=True)
class SimulationDesign:
    """Fixed covariate patterns, one block of subjects per pattern.

    Censoring is administrative: every subject still at risk at
    ``censor_time`` is recorded as censored there, cured subjects included.
    """

    group_sizes: tuple
    group_covariates: tuple
    true_params: ParameterVector
    censor_time: float
    seed: int = 0
    names: tuple = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        covs = tuple(np.atleast_1d(np.asarray(c, dtype=float)) for c in self.group_covariates)
        if len(sizes) != len(covs) or not sizes:
            raise ValueError("group_sizes and group_covariates must be non-empty and aligned")
        if min(sizes) < 1:
            raise ValueError("every group needs at least one subject")
        if not (np.isfinite(self.censor_time) and self.censor_time > 0):
            raise ValueError("censor_time must be positive")
        q = self.true_params.q
        if any(c.size != q for c in covs):
            raise ValueError(f"each covariate pattern must have {q} entries")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "group_covariates", covs)

    @property
    def n(self):
        return sum(self.group_sizes)


def inverse_susceptible(u, theta, wp):
    """Time ``t`` at which the promotion-form susceptible survival equals ``u``.

    Solves ``(exp(-theta F) - exp(-theta)) / (1 - exp(-theta)) = u`` for ``F``
    and maps it through the Weibull quantile function.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or not np.all(np.isfinite(u)):
        raise DomainError("u must lie strictly inside (0, 1)")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise DomainError("theta must be positive")
    small = theta < THETA_LIMIT
    safe_theta = np.where(small, 1.0, theta)
    cdf = -np.log1p((1.0 - u) * np.expm1(-safe_theta)) / safe_theta
    cdf = np.where(small, 1.0 - u, cdf)
    out = weibull_ppf(np.clip(cdf, 0.0, np.nextafter(1.0, 0.0)), wp)
    return float(out) if np.ndim(out) == 0 else out


def sample_susceptible_times(size, theta, wp, variant, rng):
    u = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size)
    if ModelVariant.parse(variant) is ModelVariant.ZICR:
        times = weibull_ppf(1.0 - u, wp)
    else:
        times = inverse_susceptible(u, theta, wp)
    return np.maximum(np.asarray(times, dtype=float), np.finfo(float).tiny)


def latent_cause_times(size, theta, wp, rng):
    """Susceptible lifetimes from the competing-causes construction.

    Draws a zero-truncated Poisson(theta) cause count per subject and returns
    the minimum of that many Weibull activation times. Slow relative to
    :func:`inverse_susceptible`; kept as an independent reference sampler.
    """
    counts = rng.poisson(theta, size)
    redo = counts == 0
    while np.any(redo):
        counts[redo] = rng.poisson(theta, int(redo.sum()))
        redo = counts == 0
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    draws = wp.scale * rng.weibull(wp.shape, int(counts.sum()))
    return np.minimum.reduceat(draws, starts)


def group_seeds(seed, n_groups):
    return np.random.SeedSequence(seed).spawn(n_groups)


def simulate(design, variant=ModelVariant.ZIPCR):
    """Draw one dataset from ``design``.

    Each subject is zero-time (recorded as ``t=0, event=1``), cured
    (censored at the cutoff) or susceptible (lifetime by inverse transform,
    censored at the cutoff) with its pattern's class probabilities.
    Every group uses its own random stream spawned from ``design.seed``.
    """
    variant = ModelVariant.parse(variant)
    params = design.true_params
    wp = params.weibull
    times, events, covs = [], [], []
    for size, x, ss in zip(design.group_sizes, design.group_covariates, group_seeds(design.seed, len(design.group_sizes))):
        rng = np.random.default_rng(ss)
        w = link_weights(x, params.coeffs)
        u = rng.random(size)
        zero = u < w.gamma0
        cured = (~zero) & (u < w.gamma0 + w.gamma1)
        susc = ~(zero | cured)
        t = np.full(size, float(design.censor_time))
        d = np.zeros(size, dtype=np.int64)
        t[zero] = 0.0
        d[zero] = 1
        lifetimes = sample_susceptible_times(int(susc.sum()), w.theta, wp, variant, rng)
        failed = lifetimes <= design.censor_time
        idx = np.flatnonzero(susc)
        t[idx[failed]] = lifetimes[failed]
        d[idx[failed]] = 1
        times.append(t)
        events.append(d)
        covs.append(np.tile(x, (size, 1)))
    names = list(design.names) if design.names is not None else None
    x_all = np.vstack(covs)
    return Dataset(np.concatenate(times), np.concatenate(events), x_all, names=names)


def model_class_fractions(design_or_groups, params, variant, censor_time):
    """Expected (zero, event, censored) shares implied by the model at a cutoff."""
    if isinstance(design_or_groups, SimulationDesign):
        sizes, covs = design_or_groups.group_sizes, design_or_groups.group_covariates
    else:
        sizes, covs = design_or_groups
    total = float(sum(sizes))
    zero = event = cens = 0.0
    for size, x in zip(sizes, covs):
        w = link_weights(x, params.coeffs)
        s = susceptible_survival(censor_time, w.theta, params.weibull, variant)
        zero += size * w.gamma0
        cens += size * (w.gamma1 + w.susceptible * s)
        event += size * w.susceptible * (1.0 - s)
    return zero / total, event / total, cens / total


def calibrate_censor_time(group_sizes, group_covariates, params, variant, censored_fraction):
    """Cutoff whose model-implied censored share equals ``censored_fraction``."""
    groups = (tuple(group_sizes), tuple(np.atleast_1d(np.asarray(c, float)) for c in group_covariates))
    lo_frac = model_class_fractions(groups, params, variant, 1e12)[2]
    hi_frac = 1.0 - model_class_fractions(groups, params, variant, 1e-12)[0]
    if not lo_frac < censored_fraction < hi_frac:
        raise ValueError(
            f"censored fraction must lie in ({lo_frac:.4f}, {hi_frac:.4f}) for these parameters"
        )

    def gap(log_c):
        return model_class_fractions(groups, params, variant, np.exp(log_c))[2] - censored_fraction

    scale = params.weibull.lambda_log
    lo, hi = scale - 5.0, scale + 5.0
    while gap(lo) < 0:
        lo -= 5.0
    while gap(hi) > 0:
        hi += 5.0
    return float(np.exp(brentq(gap, lo, hi, xtol=1e-12)))
