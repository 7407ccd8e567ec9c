"""Kaplan-Meier curves and fitted-model curves for diagnostic overlays."""
import enum
from dataclasses import dataclass

import numpy as np

from .models import ModelVariant, link_weights, population_survival


class CurveKind(enum.Enum):
    EMPIRICAL = "empirical"
    FITTED = "fitted"


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    survival: np.ndarray
    kind: CurveKind
    label: str = "all"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.survival, dtype=float)
        if t.shape != s.shape or t.ndim != 1:
            raise ValueError("times and survival must be 1-d arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("curve times must be strictly increasing")
        if np.any(np.diff(s) > 1e-12) or (s.size and s[0] > 1.0):
            raise ValueError("survival must be nonincreasing and at most 1")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "survival", s)

    @property
    def points(self):
        return list(zip(self.times.tolist(), self.survival.tolist()))

    def __call__(self, t):
        """Right-continuous step evaluation (for empirical curves)."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1
        return np.where(idx >= 0, self.survival[np.maximum(idx, 0)], 1.0)


def kaplan_meier(data, label="all"):
    """Product-limit estimate of the (possibly improper) survival curve.

    Zero-time rows count as events at ``t = 0`` whatever their event flag, so
    the curve starts at ``1 - d0/n``. At tied times events are removed from
    the risk set before censorings. The returned curve holds ``t = 0``, every
    distinct positive event time, and the last follow-up time when it lies
    beyond the last event.
    """
    time = np.asarray(data.time, dtype=float)
    event = np.asarray(data.event).astype(bool) | (time == 0)
    n = time.size

    event_times = np.unique(time[event])
    # at-risk counts: subjects with time >= t
    sorted_t = np.sort(time)
    at_risk = n - np.searchsorted(sorted_t, event_times, side="left")
    deaths = np.searchsorted(np.sort(time[event]), event_times, side="right") - np.searchsorted(
        np.sort(time[event]), event_times, side="left"
    )
    surv = np.cumprod(1.0 - deaths / at_risk)

    times = event_times
    if times.size == 0 or times[0] > 0:
        times = np.concatenate([[0.0], times])
        surv = np.concatenate([[1.0], surv])
    t_max = time.max()
    if t_max > times[-1]:
        times = np.append(times, t_max)
        surv = np.append(surv, surv[-1])
    return SurvivalCurve(times, surv, CurveKind.EMPIRICAL, label)


def fitted_curve(fit, x, variant=None, grid=None, label="fitted", x_cure=None):
    """Model survival ``gamma1 + (1 - gamma0 - gamma1) S*(t)`` for one covariate pattern.

    ``fit`` may be a ``FitResult`` or a ``ParameterVector``; ``variant``
    defaults to the fit's own variant.
    """
    params = getattr(fit, "estimates", fit)
    if variant is None:
        variant = getattr(fit, "variant", ModelVariant.ZIPCR)
    variant = ModelVariant.parse(variant)
    grid = np.asarray(grid if grid is not None else [0.0], dtype=float)
    if grid.size == 0 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and start at 0")
    w = link_weights(x, params.coeffs, x_cure)
    s = np.atleast_1d(population_survival(grid, w, params.weibull, variant))
    return SurvivalCurve(grid, s, CurveKind.FITTED, label)
