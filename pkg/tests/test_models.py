import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from zipcr import bank_portfolio
from zipcr.models import (
    MixtureWeights,
    ModelVariant,
    RegressionCoefficients,
    link_weights,
    linear_predictors,
    population_survival,
    promotion_density,
    promotion_survival,
    susceptible_density,
    susceptible_survival,
)
from zipcr.weibull import DomainError, WeibullParams, weibull_cdf, weibull_pdf

BANK_W = WeibullParams(0.1337, 3.2746)
coeff_strategy = st.lists(st.floats(-8, 8), min_size=6, max_size=6)


def test_link_bank_group_x1():
    w = link_weights([1, 0], bank_portfolio.ZIPCR_ESTIMATES.coeffs)
    assert abs(100 * w.gamma0 - 8.4526) < 1e-3
    assert abs(100 * w.gamma1 - 67.9279) < 1e-3


def test_link_bank_reference_group():
    w = link_weights([0, 0], bank_portfolio.ZIPCR_ESTIMATES.coeffs)
    assert abs(100 * w.gamma0 - 3.1884) < 1e-3
    assert abs(100 * w.gamma1 - 83.7422) < 1e-3


def test_link_symmetric_at_zero_coefficients():
    w = link_weights([3.0, -7.0], RegressionCoefficients(np.zeros(3), np.zeros(3)))
    assert_allclose([w.gamma0, w.gamma1], [1 / 3, 1 / 3], rtol=1e-15)


def test_link_large_predictors_no_nan():
    w = link_weights([0.0], RegressionCoefficients([800.0, 0.0], [790.0, 0.0]))
    assert np.isfinite(w.gamma0) and np.isfinite(w.gamma1)
    assert w.gamma0 + w.gamma1 <= 1


def test_link_rejects_nonfinite():
    with pytest.raises(ValueError, match=r"beta_theta\[1\]"):
        RegressionCoefficients([0.0, 1.0], [0.0, np.inf])


def test_link_kappa_theta_are_neg_logs():
    w = link_weights([1, 0], bank_portfolio.ZIPCR_ESTIMATES.coeffs)
    assert abs(w.kappa + np.log(w.gamma0)) < 1e-12
    assert abs(w.theta + np.log(w.gamma1)) < 1e-12


def test_link_distinct_cure_covariates():
    c = RegressionCoefficients([0.1, 0.5], [0.2, -0.4])
    w = link_weights([1.0], c, x_cure=[2.0])
    ek, et = 0.1 + 0.5, 0.2 - 0.8
    d = 1 + np.exp(ek) + np.exp(et)
    assert_allclose([w.gamma0, w.gamma1], [np.exp(ek) / d, np.exp(et) / d], rtol=1e-14)


@given(coeffs=coeff_strategy, x=st.lists(st.floats(-3, 3), min_size=2, max_size=2))
@settings(max_examples=200, deadline=None)
def test_link_odds_identity(coeffs, x):
    c = RegressionCoefficients(coeffs[:3], coeffs[3:])
    w = link_weights(x, c)
    ek, et = linear_predictors(x, x, c)
    assert_allclose(np.log(w.gamma0) - np.log(w.gamma1), ek - et, atol=1e-12)
    parts = [w.gamma0, w.gamma1, 1 - w.gamma0 - w.gamma1]
    assert all(0 <= v <= 1 for v in parts)
    assert abs(sum(parts) - 1.0) < 1e-15


def test_susceptible_survival_at_zero():
    assert susceptible_survival(0.0, 0.37, BANK_W) == 1.0


def test_susceptible_survival_tail():
    assert susceptible_survival(50 * BANK_W.scale, 1.0, BANK_W) < 1e-6


def test_susceptible_survival_half_cdf():
    # S*_p at theta=2, F=1/2 equals (e^-1 - e^-2)/(1 - e^-2) = 1/(1+e)
    wp = WeibullParams(0.0, 0.0)
    t = np.log(2.0)
    assert_allclose(weibull_cdf(t, wp), 0.5, rtol=1e-15)
    assert_allclose(susceptible_survival(t, 2.0, wp), 0.26894142136999512075, rtol=1e-13)


def test_susceptible_survival_rejects_bad_theta():
    with pytest.raises(DomainError):
        susceptible_survival(1.0, 0.0, BANK_W)
    with pytest.raises(DomainError):
        susceptible_survival(1.0, -1.0, BANK_W)


def test_tiny_theta_uses_limit():
    t = np.linspace(0, 100, 11)
    assert_allclose(susceptible_survival(t, 1e-12, BANK_W), 1 - weibull_cdf(t, BANK_W), atol=1e-15)
    assert_allclose(susceptible_density(t[1:], 1e-12, BANK_W), weibull_pdf(t[1:], BANK_W), rtol=1e-12)
    # continuity across the switch
    assert_allclose(
        susceptible_survival(t, 2e-8, BANK_W), susceptible_survival(t, 5e-9, BANK_W), atol=1e-7
    )


def test_susceptible_density_bank_value():
    # 40-digit mpmath evaluation of exp(-theta F) theta f / (1 - e^-theta) at t=5, theta=1
    assert_allclose(susceptible_density(5.0, 1.0, BANK_W), 0.040438192517427454944, rtol=1e-12)
    assert_allclose(susceptible_survival(5.0, 1.0, BANK_W), 0.79540865141269199062, rtol=1e-12)


def test_susceptible_density_is_negative_derivative():
    h = 1e-5
    fd = (susceptible_survival(5 + h, 1.0, BANK_W) - susceptible_survival(5 - h, 1.0, BANK_W)) / (2 * h)
    assert_allclose(susceptible_density(5.0, 1.0, BANK_W), -fd, rtol=1e-6)


def test_susceptible_density_near_zero_with_shape_above_one():
    # f*(t) ~ t^(alpha - 1) with alpha - 1 = 0.143: slow, but zero in the limit
    vals = susceptible_density(np.array([1e-12, 1e-100, 1e-250]), 1.0, BANK_W)
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 1e-30


def test_zicr_susceptible_is_plain_weibull():
    t = np.array([0.5, 3.0, 40.0])
    for theta in (0.1, 2.0, 9.0):
        assert_allclose(susceptible_density(t, theta, BANK_W, "zicr"), weibull_pdf(t, BANK_W))
        assert_allclose(susceptible_survival(t, theta, BANK_W, "zicr"), 1 - weibull_cdf(t, BANK_W))


def test_population_survival_start_and_plateau():
    w = link_weights([0, 0], bank_portfolio.ZIPCR_ESTIMATES.coeffs)
    assert population_survival(0.0, w, BANK_W) == 1 - w.gamma0
    assert abs(population_survival(0.0, w, BANK_W) - 0.968116) < 1e-5
    assert abs(population_survival(50 * BANK_W.scale, w, BANK_W) - w.gamma1) < 1e-6


def test_population_survival_reduces_to_promotion_model():
    t = np.linspace(0, 200, 100)
    for theta in (0.3, 1.0, 4.0):
        w = MixtureWeights(0.0, np.exp(-theta), np.inf, theta)
        assert_allclose(population_survival(t, w, BANK_W), promotion_survival(t, theta, BANK_W), atol=1e-12)


def test_promotion_density_relation():
    # f_p = (1 - e^-theta) f*_p
    t = np.linspace(0.5, 80, 20)
    theta = 1.7
    assert_allclose(
        promotion_density(t, theta, BANK_W),
        (1 - np.exp(-theta)) * susceptible_density(t, theta, BANK_W),
        rtol=1e-13,
    )


def test_variants_agree_at_ends_and_differ_between():
    w = MixtureWeights.from_fractions(0.1, np.exp(-1.0))
    grid = np.linspace(0, 50 * BANK_W.scale, 200)
    zipcr = population_survival(grid, w, BANK_W, ModelVariant.ZIPCR)
    zicr = population_survival(grid, w, BANK_W, ModelVariant.ZICR)
    assert zipcr[0] == zicr[0]
    assert abs(zipcr[-1] - zicr[-1]) < 1e-9
    assert np.max(np.abs(zipcr - zicr)) > 1e-3


@given(
    t=st.lists(st.floats(0, 500), min_size=2, max_size=20),
    theta=st.floats(1e-6, 20),
    alpha_log=st.floats(-1, 1),
)
@settings(max_examples=100, deadline=None)
def test_susceptible_survival_nonincreasing(t, theta, alpha_log):
    wp = WeibullParams(alpha_log, 2.0)
    t = np.sort(np.array(t))
    s = susceptible_survival(t, theta, wp)
    assert np.all(np.diff(s) <= 1e-15)
    assert np.all((s >= 0) & (s <= 1))


def test_variant_parse():
    assert ModelVariant.parse("ZIPCR") is ModelVariant.ZIPCR
    with pytest.raises(ValueError):
        ModelVariant.parse("weibull")


def test_coefficient_lengths_must_match():
    with pytest.raises(ValueError):
        RegressionCoefficients([0.0, 1.0], [0.0])
