"""Row-wise log-likelihood kernels.

Two implementations of the same computation: a numba-compiled loop and a
vectorized numpy version. ``rowwise_loglik`` dispatches to numba when it is
available and not disabled through ``ZIPCR_DISABLE_NUMBA``.

Everything is evaluated in log space. With ``lse = log(1 + e^eta_k + e^eta_t)``::

    zero row        log gamma0           = eta_k - lse
    event row       log((1-g0-g1) f*)    = -lse + log f*(t)
    censored row    log(g1 + (1-g0-g1)S*) = -lse + logaddexp(eta_t, log S*(t))

and ``theta = lse - eta_t``. For the promotion form::

    log f*(t) = log theta - theta F(t) - log(1 - e^-theta) + log f(t)
    log S*(t) = -theta F(t) + log(1 - exp(-theta e^-z)) - log(1 - e^-theta)

with ``z`` the Weibull cumulative hazard and ``F = 1 - e^-z``.

Rows are sorted once per dataset by (covariate pattern, time, event). The
numba loop then recomputes pattern terms only when the pattern changes and
copies the previous value for exact duplicate rows, which are common under
administrative censoring.
"""
import math
from typing import NamedTuple

import numpy as np

from ._backend import HAS_NUMBA, njit

THETA_LIMIT = 1e-8
LOGLIK_FLOOR = -1e10


class KernelInputs(NamedTuple):
    time: np.ndarray
    log_time: np.ndarray
    event: np.ndarray
    xk: np.ndarray
    xt: np.ndarray
    order: np.ndarray


def prepare_inputs(time, event, xk, xt):
    """Sort rows by (pattern, time, event) and precompute ``log t``."""
    keys = [np.asarray(event), np.asarray(time)]
    keys += [xt[:, j] for j in range(xt.shape[1] - 1, -1, -1)]
    keys += [xk[:, j] for j in range(xk.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys)
    t = np.ascontiguousarray(time[order], dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_t = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
    return KernelInputs(
        t,
        log_t,
        np.ascontiguousarray(event[order], dtype=np.int64),
        np.ascontiguousarray(xk[order], dtype=np.float64),
        np.ascontiguousarray(xt[order], dtype=np.float64),
        order,
    )


@njit(cache=True)
def _rowwise_numba(time, log_time, event, xk, xt, params, promotion):
    n, p = xk.shape
    out = np.empty(n)
    floored = 0
    a_log = params[2 * p]
    l_log = params[2 * p + 1]
    alpha = math.exp(a_log)

    prev_k = math.nan
    prev_t = math.nan
    prev_time = -1.0
    prev_event = -1
    prev_val = 0.0
    lse = 0.0
    theta = 0.0
    use_promo = False
    log_theta = 0.0
    log_norm = 0.0
    for i in range(n):
        ek = 0.0
        et = 0.0
        for j in range(p):
            ek += xk[i, j] * params[j]
            et += xt[i, j] * params[p + j]
        t = time[i]
        same_pattern = ek == prev_k and et == prev_t
        if same_pattern and t == prev_time and event[i] == prev_event:
            val = prev_val
        else:
            if not same_pattern:
                m = max(ek, et, 0.0)
                lse = m + math.log(math.exp(-m) + math.exp(ek - m) + math.exp(et - m))
                theta = lse - et
                use_promo = promotion and theta >= THETA_LIMIT
                if use_promo:
                    log_theta = math.log(theta)
                    log_norm = math.log(-math.expm1(-theta))
                prev_k = ek
                prev_t = et
            if t == 0.0:
                val = ek - lse
            else:
                lr = log_time[i] - l_log
                z = math.exp(alpha * lr)
                if event[i] == 1:
                    val = -lse + a_log - l_log + (alpha - 1.0) * lr - z
                    if use_promo:
                        val += log_theta + theta * math.expm1(-z) - log_norm
                else:
                    if use_promo:
                        inner = -math.expm1(-theta * math.exp(-z))
                        if inner > 0.0:
                            ls = theta * math.expm1(-z) + math.log(inner) - log_norm
                        else:
                            ls = -math.inf
                    else:
                        ls = -z
                    if ls == -math.inf:
                        val = -lse + et
                    elif et >= ls:
                        val = -lse + et + math.log1p(math.exp(ls - et))
                    else:
                        val = -lse + ls + math.log1p(math.exp(et - ls))
            if not (val >= LOGLIK_FLOOR):
                val = LOGLIK_FLOOR
            prev_time = t
            prev_event = event[i]
            prev_val = val
        if val == LOGLIK_FLOOR:
            floored += 1
        out[i] = val
    return out, floored


def _rowwise_numpy(time, log_time, event, xk, xt, params, promotion):
    p = xk.shape[1]
    a_log = params[2 * p]
    l_log = params[2 * p + 1]
    alpha = np.exp(a_log)
    ek = xk @ params[:p]
    et = xt @ params[p : 2 * p]
    m = np.maximum(np.maximum(ek, et), 0.0)
    lse = m + np.log(np.exp(-m) + np.exp(ek - m) + np.exp(et - m))

    zero = time == 0.0
    pos = ~zero
    out = np.empty(time.size)
    out[zero] = ek[zero] - lse[zero]

    etp, lsep = et[pos], lse[pos]
    ev = event[pos] == 1
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        lr = log_time[pos] - l_log
        z = np.exp(alpha * lr)
        theta = lsep - etp
        use_promo = (theta >= THETA_LIMIT) & bool(promotion)
        safe_theta = np.where(use_promo, theta, 1.0)
        log_norm = np.log(-np.expm1(-safe_theta))
        neg_cdf = np.expm1(-z)
        logf = a_log - l_log + (alpha - 1.0) * lr - z
        log_fstar = np.where(use_promo, np.log(safe_theta) + safe_theta * neg_cdf - log_norm + logf, logf)
        log_s = np.where(
            use_promo,
            safe_theta * neg_cdf + np.log(-np.expm1(-safe_theta * np.exp(-z))) - log_norm,
            -z,
        )
        val = np.where(ev, -lsep + log_fstar, -lsep + np.logaddexp(etp, log_s))
    out[pos] = val
    bad = ~(out >= LOGLIK_FLOOR)
    out[bad] = LOGLIK_FLOOR
    return out, int(np.count_nonzero(out == LOGLIK_FLOOR))


def rowwise_loglik(inputs, params, promotion, use_numba=None):
    """Per-row log-likelihood contributions and the count of floored rows.

    Parameters
    ----------
    inputs : KernelInputs
        Output of :func:`prepare_inputs`; design matrices include the
        intercept column.
    params : np.ndarray, shape (2(q+1)+2,)
    promotion : bool
        True for the ZIPCR susceptible law, False for plain Weibull (ZICR).
    use_numba : bool, optional
        Override the module-level backend choice.

    Returns
    -------
    values : np.ndarray
        Contributions in the original row order.
    floored : int
    """
    use_numba = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    params = np.ascontiguousarray(params, dtype=np.float64)
    kernel = _rowwise_numba if use_numba else _rowwise_numpy
    sorted_vals, floored = kernel(
        inputs.time, inputs.log_time, inputs.event, inputs.xk, inputs.xt, params, bool(promotion)
    )
    values = np.empty_like(sorted_vals)
    values[inputs.order] = sorted_vals
    return values, floored
