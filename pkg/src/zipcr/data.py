"""Observations, datasets and the flat parameter layout shared by all modules."""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .models import RegressionCoefficients
from .weibull import WeibullParams


@dataclass(frozen=True)
class Observation:
    time: float
    event: int
    covariates_zero: np.ndarray = field(default_factory=lambda: np.empty(0))
    covariates_cure: np.ndarray = None

    def __post_init__(self):
        if not np.isfinite(self.time) or self.time < 0:
            raise ValueError(f"time must be finite and nonnegative, got {self.time}")
        if self.event not in (0, 1):
            raise ValueError(f"event must be 0 or 1, got {self.event}")
        xz = np.atleast_1d(np.asarray(self.covariates_zero, dtype=float))
        xc = xz if self.covariates_cure is None else np.atleast_1d(
            np.asarray(self.covariates_cure, dtype=float)
        )
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "event", int(self.event))
        object.__setattr__(self, "covariates_zero", xz)
        object.__setattr__(self, "covariates_cure", xc)


class Dataset:
    """Column-oriented collection of censored lifetimes with covariates.

    Parameters
    ----------
    time : array_like, shape (n,)
        Nonnegative lifetimes. Exact zeros are routed to the zero class.
    event : array_like, shape (n,)
        1 for an observed event, 0 for right censoring.
    x_zero : array_like, shape (n, q), optional
        Covariates for the zero-inflation part (no intercept column).
    x_cure : array_like, shape (n, q), optional
        Covariates for the cure part; defaults to ``x_zero``.
    names : sequence of str, optional
        Covariate names, used in reports.
    """

    def __init__(self, time, event, x_zero=None, x_cure=None, names=None):
        time = np.asarray(time, dtype=float).reshape(-1)
        event = np.asarray(event).reshape(-1)
        n = time.size
        if n < 1:
            raise ValueError("dataset must contain at least one observation")
        if event.size != n:
            raise ValueError("time and event must have the same length")
        if not np.all(np.isfinite(time)) or np.any(time < 0):
            bad = int(np.flatnonzero(~np.isfinite(time) | (time < 0))[0])
            raise ValueError(f"row {bad}: time must be finite and nonnegative")
        if not np.all(np.isin(event, (0, 1))):
            bad = int(np.flatnonzero(~np.isin(event, (0, 1)))[0])
            raise ValueError(f"row {bad}: event must be 0 or 1")
        x_zero = np.empty((n, 0)) if x_zero is None else np.asarray(x_zero, dtype=float)
        if x_zero.ndim == 1:
            x_zero = x_zero[:, None]
        x_cure = x_zero if x_cure is None else np.asarray(x_cure, dtype=float)
        if x_cure.ndim == 1:
            x_cure = x_cure[:, None]
        if x_zero.shape[0] != n or x_cure.shape != x_zero.shape:
            raise ValueError(
                f"covariate matrices must both be ({n}, q); got {x_zero.shape} and {x_cure.shape}"
            )
        if not (np.all(np.isfinite(x_zero)) and np.all(np.isfinite(x_cure))):
            raise ValueError("covariates must be finite")

        self.time = time
        self.event = event.astype(np.int64)
        self.x_zero = np.ascontiguousarray(x_zero)
        self.x_cure = np.ascontiguousarray(x_cure)
        q = x_zero.shape[1]
        self.names = list(names) if names is not None else [f"x{j + 1}" for j in range(q)]
        if len(self.names) != q:
            raise ValueError("names must match the number of covariates")

        if np.any((time == 0) & (self.event == 0)):
            warnings.warn(
                "zero-time rows with event=0 are treated as zero-class observations",
                stacklevel=2,
            )

    @classmethod
    def from_observations(cls, observations, names=None):
        obs = list(observations)
        if not obs:
            raise ValueError("dataset must contain at least one observation")
        return cls(
            [o.time for o in obs],
            [o.event for o in obs],
            np.array([o.covariates_zero for o in obs]).reshape(len(obs), -1),
            np.array([o.covariates_cure for o in obs]).reshape(len(obs), -1),
            names=names,
        )

    @property
    def n(self):
        return self.time.size

    @property
    def q(self):
        return self.x_zero.shape[1]

    @property
    def shared_covariates(self):
        return self.x_cure is self.x_zero or np.array_equal(self.x_zero, self.x_cure)

    def __len__(self):
        return self.n

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def __getitem__(self, i):
        return Observation(self.time[i], int(self.event[i]), self.x_zero[i], self.x_cure[i])

    def subset(self, mask):
        mask = np.asarray(mask)
        return Dataset(
            self.time[mask], self.event[mask], self.x_zero[mask], self.x_cure[mask], self.names
        )

    def with_times(self, time):
        return Dataset(time, self.event, self.x_zero, self.x_cure, self.names)

    def design_zero(self):
        return np.column_stack([np.ones(self.n), self.x_zero])

    def design_cure(self):
        return np.column_stack([np.ones(self.n), self.x_cure])

    def groups(self):
        """Distinct covariate patterns as ``(x_zero, x_cure, mask)`` in first-seen order."""
        keys = np.column_stack([self.x_zero, self.x_cure])
        _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        out = []
        for g in np.argsort(first):
            i = first[g]
            out.append((self.x_zero[i], self.x_cure[i], inverse == g))
        return out

    def summary(self):
        zero = self.time == 0
        return {
            "n": self.n,
            "zeros": int(zero.sum()),
            "events": int(((~zero) & (self.event == 1)).sum()),
            "censored": int(((~zero) & (self.event == 0)).sum()),
        }


@dataclass(frozen=True)
class ParameterVector:
    """Flat layout ``[beta_kappa (q+1), beta_theta (q+1), alpha_log, lambda_log]``."""

    coeffs: RegressionCoefficients
    weibull: WeibullParams

    @property
    def q(self):
        return self.coeffs.n_covariates

    def __len__(self):
        return 2 * (self.q + 1) + 2

    def to_array(self):
        return np.concatenate(
            [
                self.coeffs.beta_kappa,
                self.coeffs.beta_theta,
                [self.weibull.alpha_log, self.weibull.lambda_log],
            ]
        )

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.size < 4 or values.size % 2:
            raise ValueError(f"parameter vector length must be 2(q+1)+2, got {values.size}")
        p = (values.size - 2) // 2
        return cls(
            RegressionCoefficients(values[:p], values[p : 2 * p]),
            WeibullParams(float(values[2 * p]), float(values[2 * p + 1])),
        )

    @classmethod
    def build(cls, beta_kappa, beta_theta, alpha_log, lambda_log):
        return cls(
            RegressionCoefficients(beta_kappa, beta_theta),
            WeibullParams(float(alpha_log), float(lambda_log)),
        )

    def labels(self, names=None):
        names = names if names is not None else [f"x{j + 1}" for j in range(self.q)]
        return (
            ["beta_kappa[intercept]"]
            + [f"beta_kappa[{nm}]" for nm in names]
            + ["beta_theta[intercept]"]
            + [f"beta_theta[{nm}]" for nm in names]
            + ["alpha_log", "lambda_log"]
        )
