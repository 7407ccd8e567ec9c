"""Censored, zero-inflated log-likelihood and its numerical gradient."""
import numpy as np

from .data import Dataset, Observation, ParameterVector
from .kernels import prepare_inputs, rowwise_loglik
from .models import ModelVariant


class LikelihoodError(FloatingPointError):
    pass


def _as_array(params):
    if isinstance(params, ParameterVector):
        return params.to_array()
    return np.asarray(params, dtype=float).reshape(-1)


def _prepared(data):
    cache = getattr(data, "_kernel_inputs", None)
    if cache is None:
        cache = prepare_inputs(data.time, data.event, data.design_zero(), data.design_cure())
        data._kernel_inputs = cache
    return cache


def _check_layout(values, data):
    expected = 2 * (data.q + 1) + 2
    if values.size != expected:
        raise ValueError(f"expected {expected} parameters for q={data.q}, got {values.size}")


def rowwise(data, params, variant=ModelVariant.ZIPCR, use_numba=None):
    """Per-observation log contributions and the number of rows hitting the floor."""
    variant = ModelVariant.parse(variant)
    values = _as_array(params)
    _check_layout(values, data)
    return rowwise_loglik(_prepared(data), values, variant is ModelVariant.ZIPCR, use_numba=use_numba)


def log_likelihood_one(obs, params, variant=ModelVariant.ZIPCR):
    """Log-likelihood contribution of a single observation.

    Zero-time rows contribute ``log gamma0`` whatever their event flag; other
    rows contribute the log density (events) or log improper survival
    (censored). A branch value that underflows is replaced by ``-1e10``.
    """
    if not isinstance(obs, Observation):
        raise TypeError("obs must be an Observation")
    data = Dataset(
        [obs.time], [obs.event], obs.covariates_zero[None, :], obs.covariates_cure[None, :]
    )
    vals, _ = rowwise(data, params, variant)
    return float(vals[0])


def log_likelihood(data, params, variant=ModelVariant.ZIPCR, return_floored=False, use_numba=None):
    """Total log-likelihood, the sum of per-row log contributions.

    Parameters
    ----------
    data : Dataset
    params : ParameterVector or array_like
        Flat layout ``[beta_kappa, beta_theta, alpha_log, lambda_log]``.
    variant : ModelVariant or str
    return_floored : bool
        Also return the number of rows whose contribution was floored.
    """
    vals, floored = rowwise(data, params, variant, use_numba=use_numba)
    total = float(np.sum(vals))
    if return_floored:
        return total, floored
    return total


def finite_difference_steps(values, rel_step):
    return rel_step * np.maximum(1.0, np.abs(values))


def gradient(data, params, variant=ModelVariant.ZIPCR, rel_step=1e-6):
    """Central-difference gradient of :func:`log_likelihood`.

    Step for coordinate ``j`` is ``rel_step * max(1, |param_j|)``. If a probe
    evaluates to a non-finite value or changes the number of floored rows, the step is
    shrunk tenfold once before giving up.
    """
    variant = ModelVariant.parse(variant)
    values = _as_array(params)
    return numerical_gradient(
        lambda v: log_likelihood(data, v, variant, return_floored=True), values, rel_step
    )


def numerical_gradient(func, values, rel_step=1e-6):
    """Central differences of ``func``; ``func`` may return ``(value, floored_rows)``."""
    values = np.asarray(values, dtype=float)
    steps = finite_difference_steps(values, rel_step)
    grad = np.empty(values.size)

    def evaluate(x):
        out = func(x)
        return out if isinstance(out, tuple) else (out, 0)

    _, base_floored = evaluate(values)
    for j in range(values.size):
        for h in (steps[j], steps[j] / 10.0):
            up = values.copy()
            dn = values.copy()
            up[j] += h
            dn[j] -= h
            (f_up, fl_up), (f_dn, fl_dn) = evaluate(up), evaluate(dn)
            if np.isfinite(f_up) and np.isfinite(f_dn) and fl_up == fl_dn == base_floored:
                grad[j] = (f_up - f_dn) / (2.0 * h)
                break
        else:
            raise LikelihoodError(f"log-likelihood not finite near parameter {j}")
    return grad
