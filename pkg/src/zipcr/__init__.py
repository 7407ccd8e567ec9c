"""Zero-inflated promotion cure rate (ZIPCR) and zero-inflated cure rate (ZICR) regression."""
from ._backend import HAS_NUMBA, backend_name
from .data import Dataset, Observation, ParameterVector
from .estimator import (
    ConfigError,
    FitResult,
    InformationMatrixError,
    OptimizerConfig,
    fit,
    group_outcomes,
    information_criteria,
    observed_information,
    wald_interval,
    wald_z,
)
from .km import CurveKind, SurvivalCurve, fitted_curve, kaplan_meier
from .likelihood import gradient, log_likelihood, log_likelihood_one
from .models import (
    MixtureWeights,
    ModelVariant,
    RegressionCoefficients,
    link_weights,
    population_survival,
    susceptible_density,
    susceptible_survival,
)
from .simulate import SimulationDesign, calibrate_censor_time, inverse_susceptible, simulate
from .weibull import DomainError, WeibullParams, weibull_cdf, weibull_pdf

__version__ = "0.1.0"
