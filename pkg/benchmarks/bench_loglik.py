"""Compare the numba and numpy log-likelihood kernels.

Times one log-likelihood evaluation and one gradient per backend on a
simulated bank-sized portfolio, a 10x larger one, and an "untied" copy with
jittered covariates and censoring times (no duplicate rows for the numba
loop to reuse), then one full fit with the default backend.

    python benchmarks/bench_loglik.py [--repeat 20] [--scale 10]
"""
import argparse
import time

import numpy as np

from zipcr import HAS_NUMBA, Dataset, SimulationDesign, bank_portfolio, simulate
from zipcr.estimator import fit
from zipcr.likelihood import numerical_gradient, rowwise
from zipcr.simulate import calibrate_censor_time


def portfolio(scale, seed=0):
    params = bank_portfolio.ZIPCR_ESTIMATES
    sizes = [s * scale for s in bank_portfolio.GROUP_SIZES]
    cutoff = calibrate_censor_time(
        sizes, bank_portfolio.PROFILE_DUMMIES, params, "zipcr", bank_portfolio.CENSORED_FRACTION
    )
    design = SimulationDesign(sizes, bank_portfolio.PROFILE_DUMMIES, params, cutoff, seed=seed)
    return simulate(design, "zipcr")


def untie(data, seed=1):
    rng = np.random.default_rng(seed)
    time = data.time.copy()
    cens = data.event == 0
    time[cens] *= rng.uniform(0.5, 1.0, cens.sum())
    x = data.x_zero + rng.normal(0.0, 0.01, data.x_zero.shape)
    return Dataset(time, data.event, x)


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(data, use_numba, repeat):
    params = bank_portfolio.ZIPCR_ESTIMATES.to_array()
    total = lambda v: float(np.sum(rowwise(data, v, use_numba=use_numba)[0]))
    total(params)  # compile / warm caches
    return {
        "loglik": best_of(lambda: total(params), repeat),
        "gradient": best_of(lambda: numerical_gradient(total, params), max(1, repeat // 4)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--scale", type=int, default=10)
    args = parser.parse_args()

    backends = [False, True] if HAS_NUMBA else [False]
    print(f"{'data':>8} {'n':>8} {'backend':>8} {'loglik ms':>11} {'gradient ms':>12}")
    cases = [("bank", portfolio(1)), ("bank", portfolio(args.scale)), ("untied", untie(portfolio(1)))]
    for label, data in cases:
        for use_numba in backends:
            r = bench(data, use_numba, args.repeat)
            name = "numba" if use_numba else "numpy"
            print(f"{label:>8} {data.n:>8} {name:>8} {1e3 * r['loglik']:>11.3f} {1e3 * r['gradient']:>12.2f}")

    data = portfolio(1)
    t0 = time.perf_counter()
    result = fit(data, "zipcr")
    print(f"full ZIPCR fit at n={data.n} with the default backend: {time.perf_counter() - t0:.2f} s "
          f"({result.iterations} iterations, converged={result.converged})")
    if not HAS_NUMBA:
        print("numba unavailable or disabled (ZIPCR_DISABLE_NUMBA); numpy timings only")


if __name__ == "__main__":
    main()
