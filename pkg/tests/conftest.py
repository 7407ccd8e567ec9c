import sys

import numpy as np
import pytest

from zipcr import SimulationDesign, bank_portfolio, fit, simulate
from zipcr.simulate import calibrate_censor_time

N_RECOVERY = 50


def bank_design(variant="zipcr", seed=0, params=None):
    params = params if params is not None else bank_portfolio.estimates_for(variant)
    cutoff = calibrate_censor_time(
        bank_portfolio.GROUP_SIZES,
        bank_portfolio.PROFILE_DUMMIES,
        params,
        variant,
        bank_portfolio.CENSORED_FRACTION,
    )
    return SimulationDesign(
        bank_portfolio.GROUP_SIZES,
        bank_portfolio.PROFILE_DUMMIES,
        params,
        cutoff,
        seed=seed,
        names=bank_portfolio.COVARIATE_NAMES,
    )


@pytest.fixture(scope="session")
def bank_dataset():
    return simulate(bank_design(seed=2024), "zipcr")


@pytest.fixture(scope="session")
def bank_fit(bank_dataset):
    return fit(bank_dataset, "zipcr")


@pytest.fixture(scope="session")
def recovery_fits():
    """ZIPCR fits to 50 portfolios simulated at the bank-portfolio estimates."""
    out = []
    for seed in range(N_RECOVERY):
        data = simulate(bank_design(seed=10_000 + seed), "zipcr")
        out.append((data, fit(data, "zipcr")))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
