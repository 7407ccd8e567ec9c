"""Weibull baseline in log-parametrized form.

Shape and scale are stored as ``alpha = exp(alpha_log)`` and
``lambda = exp(lambda_log)`` so the optimizer works on an unconstrained space.
"""
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when an argument falls outside a function's mathematical domain."""


@dataclass(frozen=True)
class WeibullParams:
    alpha_log: float
    lambda_log: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha_log) and np.isfinite(self.lambda_log)):
            raise DomainError(
                f"Weibull parameters must be finite, got "
                f"alpha_log={self.alpha_log}, lambda_log={self.lambda_log}"
            )

    @property
    def shape(self):
        return float(np.exp(self.alpha_log))

    @property
    def scale(self):
        return float(np.exp(self.lambda_log))

    @classmethod
    def from_natural(cls, shape, scale):
        if shape <= 0 or scale <= 0:
            raise DomainError("shape and scale must be positive")
        return cls(float(np.log(shape)), float(np.log(scale)))


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise DomainError("times must be finite")
    if np.any(t < 0):
        raise DomainError("times must be nonnegative")
    return t


def _scalar_or_array(t, out):
    return float(out) if np.ndim(t) == 0 else out


def cumulative_hazard(t, p):
    """Return ``(t / lambda) ** alpha``, evaluated in log space for ``t > 0``."""
    t = _check_times(t)
    alpha = np.exp(p.alpha_log)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(t) - p.lambda_log
    z = np.where(t > 0, np.exp(alpha * log_ratio), 0.0)
    return _scalar_or_array(t, z)


def weibull_cdf(t, p):
    """Weibull distribution function ``F(t) = 1 - exp(-(t/lambda)^alpha)``.

    Parameters
    ----------
    t : float or array_like
        Nonnegative, finite time(s).
    p : WeibullParams

    Returns
    -------
    float or np.ndarray
        Probabilities in ``[0, 1]``; ``F(0) == 0``.
    """
    z = cumulative_hazard(t, p)
    return _scalar_or_array(t, -np.expm1(-np.asarray(z)))


def weibull_sf(t, p):
    z = cumulative_hazard(t, p)
    return _scalar_or_array(t, np.exp(-np.asarray(z)))


def weibull_logpdf(t, p):
    """Log density; ``t == 0`` gives ``log(1/lambda)`` for alpha == 1, -inf for alpha > 1."""
    t = _check_times(t)
    alpha = np.exp(p.alpha_log)
    if np.any(t == 0) and alpha < 1:
        raise DomainError("Weibull density diverges at t=0 when shape < 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log(t) - p.lambda_log
        z = np.where(t > 0, np.exp(alpha * log_ratio), 0.0)
        power_term = np.where(
            t > 0,
            (alpha - 1.0) * log_ratio,
            np.where(alpha == 1.0, 0.0, -np.inf),
        )
    out = p.alpha_log - p.lambda_log + power_term - z
    return _scalar_or_array(t, out)


def weibull_pdf(t, p):
    """Weibull density ``(alpha/lambda) (t/lambda)^(alpha-1) exp(-(t/lambda)^alpha)``.

    Equals the derivative of :func:`weibull_cdf`. At ``t = 0`` the density is
    ``1/lambda`` for unit shape, zero for shape above one, and undefined
    (``DomainError``) for shape below one.
    """
    return _scalar_or_array(t, np.exp(weibull_logpdf(t, p)))


def weibull_ppf(prob, p):
    """Quantile function, ``lambda * (-log(1 - prob)) ** (1/alpha)``."""
    prob = np.asarray(prob, dtype=float)
    if np.any((prob < 0) | (prob >= 1)):
        raise DomainError("probability must lie in [0, 1)")
    alpha = np.exp(p.alpha_log)
    out = np.exp(p.lambda_log) * (-np.log1p(-prob)) ** (1.0 / alpha)
    return _scalar_or_array(prob, out)
