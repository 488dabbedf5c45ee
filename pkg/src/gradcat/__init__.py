"""Closed-form gradient blow-up criteria for 2x2 non-strictly hyperbolic systems."""

from .criteria import BlowupVerdict, blows_up
from .decisive import DecisiveCoefficients, DecisiveFunction, GradientPair, coefficients, decisive_function
from .dynamics import (
    CharState,
    DerivativeState,
    EquilibriumReport,
    OracleVerdict,
    equilibria,
    global_blowup_time,
    integrate_extended_oracle,
    radon_derivatives,
    solve_characteristic,
)
from .epmodels import EPModel, RegionGrid, model_matrix, sample_region, smooth_region_predicate
from .linalg2 import JordanData, Matrix2, classify_spectrum, jordanize
from .simplewave import bounded_integral_curves, ep_simple_wave_gradient, first_integral

__all__ = [
    "BlowupVerdict",
    "CharState",
    "DecisiveCoefficients",
    "DecisiveFunction",
    "DerivativeState",
    "EPModel",
    "EquilibriumReport",
    "GradientPair",
    "JordanData",
    "Matrix2",
    "OracleVerdict",
    "RegionGrid",
    "blows_up",
    "bounded_integral_curves",
    "classify_spectrum",
    "coefficients",
    "decisive_function",
    "ep_simple_wave_gradient",
    "equilibria",
    "first_integral",
    "global_blowup_time",
    "integrate_extended_oracle",
    "jordanize",
    "model_matrix",
    "radon_derivatives",
    "sample_region",
    "smooth_region_predicate",
    "solve_characteristic",
]
