"""Super-hedging prices by convex duality on scenario trees and interval models."""

from .convex import (
    AIPViolation,
    InfeasibleMajorantError,
    OneStepPrice,
    SupportSet,
    biconjugate_price,
    concave_envelope_relative,
    fenchel_conjugate,
    one_step_price,
    one_step_price_convex,
    support_function,
)
from .interval import (
    IntervalModelParams,
    LambdaWeights,
    ValueLattice,
    bs_reference_price,
    hedge_ratio,
    lambda_weights,
    price_exact,
    price_recursive,
)
from .kernels import BACKEND
from .payoffs import PiecewisePayoff, parse_payoff
from .tree import (
    MartingaleMeasure,
    PriceProcess,
    ScenarioTree,
    brute_force_superhedge,
    check_AIP,
    check_AWIP,
    check_NA,
    conditional_support,
    essential_extrema,
    family_esssup,
    find_acmm,
    multi_period_price,
    parse_tree,
    read_tree,
)

__version__ = "0.1.0"
