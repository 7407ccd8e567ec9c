"""Reference values for the Brazilian bank-loan fraud portfolio.

The raw loan records are proprietary; what is available is the portfolio
summary per customer profile and the fitted estimates for both models. The
profile covariate ``x`` has three levels coded as dummies ``(dx1, dx2)`` with
``x = 3`` as the reference level ``(0, 0)``.
"""
from .data import ParameterVector

COVARIATE_NAMES = ("dx1", "dx2")
PROFILE_LEVELS = (1, 2, 3)
PROFILE_DUMMIES = ((1.0, 0.0), (0.0, 1.0), (0.0, 0.0))

# consumers, fraudsters (t = 0), defaulters, censored per profile
PORTFOLIO_SUMMARY = {
    1: (1626, 137, 305, 1184),
    2: (1574, 127, 242, 1205),
    3: (938, 30, 93, 815),
}
GROUP_SIZES = tuple(row[0] for row in PORTFOLIO_SUMMARY.values())
N_TOTAL = sum(GROUP_SIZES)
CENSORED_FRACTION = sum(row[3] for row in PORTFOLIO_SUMMARY.values()) / N_TOTAL

# (estimate, standard error, |est|/se) in layout order
ZIPCR_TABLE = (
    (-1.4108, 0.2132, 6.6165),
    (0.3832, 0.2333, 1.6424),
    (0.5245, 0.2363, 2.2195),
    (1.8575, 0.1208, 15.3816),
    (-0.8011, 0.1296, 6.1823),
    (-0.5504, 0.1328, 4.1460),
    (0.1337, 0.0438, 3.0557),
    (3.2746, 0.0872, 37.5577),
)
ZICR_TABLE = (
    (-1.3894033, 0.21264846, 6.533803725),
    (0.3657269, 0.23363029, 1.565408749),
    (0.5130939, 0.23665962, 2.168066948),
    (1.8784957, 0.11970854, 15.69224468),
    (-0.8121232, 0.13204012, 6.150579082),
    (-0.5585139, 0.13502802, 4.136281492),
    (0.1121479, 0.04331601, 2.589063489),
    (3.1692889, 0.07672007, 41.30977592),
)

ZIPCR_ESTIMATES = ParameterVector.from_array([row[0] for row in ZIPCR_TABLE])
ZICR_ESTIMATES = ParameterVector.from_array([row[0] for row in ZICR_TABLE])

# fitted (gamma0, gamma1) in percent, per profile x = 1, 2, 3
ZIPCR_GROUP_PERCENT = ((8.4526, 67.9279), (8.0701, 72.3510), (3.1884, 83.7422))
ZICR_GROUP_PERCENT = ((8.4255, 68.1229), (8.0687, 72.5502), (3.1981, 83.9697))

# maximized log-likelihood, AIC, BIC (k = 8, n = 4138)
ZIPCR_CRITERIA = (-5035.84, 10087.67, 10138.3)
ZICR_CRITERIA = (-5037.44, 10090.88, 10141.5)


def estimates_for(variant):
    from .models import ModelVariant

    return ZIPCR_ESTIMATES if ModelVariant.parse(variant) is ModelVariant.ZIPCR else ZICR_ESTIMATES
