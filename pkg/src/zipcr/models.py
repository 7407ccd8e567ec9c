"""ZIPCR and ZICR survival families.

Both models split the population into three classes through a three-way
multinomial-logit link: zero-time (probability ``gamma0``), cured
(``gamma1``) and susceptible (the remainder). They differ only in the law of
the susceptible lifetimes:

* ZIPCR: promotion-time form ``(exp(-theta F) - exp(-theta)) / (1 - exp(-theta))``
  where ``theta = -log(gamma1)`` is the mean latent cause count;
* ZICR: plain Weibull survival ``1 - F``.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .weibull import DomainError, WeibullParams, cumulative_hazard, weibull_pdf

# below this theta the promotion form is replaced by its limit 1 - F
THETA_LIMIT = 1e-8


class ModelVariant(enum.Enum):
    ZIPCR = "zipcr"
    ZICR = "zicr"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model variant {value!r}; expected 'zipcr' or 'zicr'")


@dataclass(frozen=True)
class RegressionCoefficients:
    """Intercept-first coefficient vectors for the zero and cure linear predictors."""

    beta_kappa: np.ndarray
    beta_theta: np.ndarray

    def __post_init__(self):
        bk = np.atleast_1d(np.asarray(self.beta_kappa, dtype=float))
        bt = np.atleast_1d(np.asarray(self.beta_theta, dtype=float))
        if bk.ndim != 1 or bt.ndim != 1 or bk.shape != bt.shape:
            raise ValueError(
                f"beta_kappa and beta_theta must be 1-d with equal length, "
                f"got shapes {bk.shape} and {bt.shape}"
            )
        for name, vec in (("beta_kappa", bk), ("beta_theta", bt)):
            bad = np.flatnonzero(~np.isfinite(vec))
            if bad.size:
                raise ValueError(f"{name}[{bad[0]}] is not finite")
        object.__setattr__(self, "beta_kappa", bk)
        object.__setattr__(self, "beta_theta", bt)

    @property
    def n_covariates(self):
        return self.beta_kappa.size - 1


@dataclass(frozen=True)
class MixtureWeights:
    gamma0: float
    gamma1: float
    kappa: float
    theta: float

    @property
    def susceptible(self):
        return 1.0 - self.gamma0 - self.gamma1

    @classmethod
    def from_fractions(cls, gamma0, gamma1):
        if not (0 < gamma0 < 1 and 0 < gamma1 < 1 and gamma0 + gamma1 < 1):
            raise DomainError(f"invalid mixture fractions ({gamma0}, {gamma1})")
        return cls(gamma0, gamma1, -np.log(gamma0), -np.log(gamma1))


def _design(x, n_coef):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != n_coef - 1:
        raise ValueError(f"expected {n_coef - 1} covariates, got {x.shape[-1]}")
    ones = np.ones(x.shape[:-1] + (1,))
    return np.concatenate([ones, x], axis=-1)


def linear_predictors(x_zero, x_cure, coeffs):
    """Return ``(eta_kappa, eta_theta)`` with intercepts prepended to the covariates."""
    k = coeffs.beta_kappa.size
    eta_k = _design(x_zero, k) @ coeffs.beta_kappa
    eta_t = _design(x_cure, k) @ coeffs.beta_theta
    return eta_k, eta_t


def log_class_probs(eta_kappa, eta_theta):
    """Log-probabilities of (zero, cured, susceptible) under the shared softmax.

    The susceptible class is the reference with linear predictor pinned at 0.
    """
    eta_kappa = np.asarray(eta_kappa, dtype=float)
    eta_theta = np.asarray(eta_theta, dtype=float)
    m = np.maximum(np.maximum(eta_kappa, eta_theta), 0.0)
    lse = m + np.log(np.exp(-m) + np.exp(eta_kappa - m) + np.exp(eta_theta - m))
    return eta_kappa - lse, eta_theta - lse, -lse


def link_weights(x, coeffs, x_cure=None):
    """Map one subject's covariates to its mixture weights.

    Parameters
    ----------
    x : array_like, shape (q,)
        Raw covariates for the zero-inflation part (no intercept column).
    coeffs : RegressionCoefficients
    x_cure : array_like, optional
        Covariates for the cure part; defaults to ``x``.

    Returns
    -------
    MixtureWeights
    """
    x_cure = x if x_cure is None else x_cure
    eta_k, eta_t = linear_predictors(x, x_cure, coeffs)
    eta_k, eta_t = float(np.squeeze(eta_k)), float(np.squeeze(eta_t))
    for idx, val in enumerate((eta_k, eta_t)):
        if not np.isfinite(val):
            raise FloatingPointError(f"non-finite linear predictor {idx} (0=kappa, 1=theta)")
    log_g0, log_g1, _ = log_class_probs(eta_k, eta_t)
    return MixtureWeights(
        gamma0=float(np.exp(log_g0)),
        gamma1=float(np.exp(log_g1)),
        kappa=float(-log_g0),
        theta=float(-log_g1),
    )


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta)) or np.any(theta <= 0):
        raise DomainError("theta must be positive and finite")
    return theta


def _promotion_sf(z, theta):
    # S*_p written as exp(-theta F) * expm1(-theta (1 - F)) / expm1(-theta), with 1 - F = exp(-z)
    small = theta < THETA_LIMIT
    safe_theta = np.where(small, 1.0, theta)
    surv = np.exp(-z)
    with np.errstate(invalid="ignore"):
        val = (
            np.exp(-safe_theta * (-np.expm1(-z)))
            * np.expm1(-safe_theta * surv)
            / np.expm1(-safe_theta)
        )
    return np.where(small, surv, val)


def susceptible_survival(t, theta, wp, variant=ModelVariant.ZIPCR):
    """Proper survival function of the susceptible class.

    For ZIPCR this is the promotion-time form; for ZICR the plain Weibull
    survival. It equals 1 at ``t = 0`` and decays to 0.
    """
    variant = ModelVariant.parse(variant)
    theta = _check_theta(theta)
    z = np.asarray(cumulative_hazard(t, wp))
    if variant is ModelVariant.ZICR:
        out = np.exp(-z) + 0.0 * theta
    else:
        out = _promotion_sf(z, theta)
    return float(out) if out.ndim == 0 else out


def susceptible_density(t, theta, wp, variant=ModelVariant.ZIPCR):
    """Density of the susceptible class, ``-d/dt`` of :func:`susceptible_survival`."""
    variant = ModelVariant.parse(variant)
    theta = _check_theta(theta)
    f = np.asarray(weibull_pdf(t, wp))
    if variant is ModelVariant.ZICR:
        out = f + 0.0 * theta
    else:
        z = np.asarray(cumulative_hazard(t, wp))
        small = theta < THETA_LIMIT
        safe_theta = np.where(small, 1.0, theta)
        promo = np.exp(-safe_theta * (-np.expm1(-z))) * safe_theta * f / (-np.expm1(-safe_theta))
        out = np.where(small, f, promo)
    return float(out) if out.ndim == 0 else out


def population_survival(t, w, wp, variant=ModelVariant.ZIPCR):
    """Improper population survival ``gamma1 + (1 - gamma0 - gamma1) S*(t)``.

    Starts at ``1 - gamma0`` and plateaus at ``gamma1``.
    """
    s = np.asarray(susceptible_survival(t, w.theta, wp, variant))
    # at t = 0 return 1 - gamma0 directly; the sum can be off by an ulp
    out = np.where(np.asarray(t) == 0, 1.0 - w.gamma0, w.gamma1 + w.susceptible * s)
    return float(out) if out.ndim == 0 else out


def promotion_survival(t, theta, wp):
    """Promotion-time (bounded cumulative hazard) survival ``exp(-theta F(t))``."""
    theta = _check_theta(theta)
    z = np.asarray(cumulative_hazard(t, wp))
    out = np.exp(-theta * (-np.expm1(-z)))
    return float(out) if out.ndim == 0 else out


def promotion_density(t, theta, wp):
    theta = _check_theta(theta)
    f = np.asarray(weibull_pdf(t, wp))
    z = np.asarray(cumulative_hazard(t, wp))
    out = theta * f * np.exp(-theta * (-np.expm1(-z)))
    return float(out) if out.ndim == 0 else out
