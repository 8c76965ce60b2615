"""Single-index contextual bandits with non-monotone links.

The main policy is :class:`ZoomSIB`: a truncated Stein estimate of the
index direction followed by sleeping UCB over bins of the projected index.
"""
from .baselines import ETCBins, GreedyProjection, OraclePolicy, RandomPolicy
from .env import (
    LINKS,
    ContextLaw,
    Link,
    SIBInstance,
    SyntheticEnvironment,
    draw_theta_star,
    get_link,
    instant_regret,
)
from .lowerbound import HardInstance, availability_mc, f_beta, kl_accumulate, validate_instance
from .policy import Adaptive, Theoretical, ZoomSIB, ZoomSIBConfig, derive_constants
from .stein import DegenerateEstimateError, SteinState

__version__ = "0.1.0"

__all__ = [
    "ETCBins",
    "GreedyProjection",
    "OraclePolicy",
    "RandomPolicy",
    "LINKS",
    "ContextLaw",
    "Link",
    "SIBInstance",
    "SyntheticEnvironment",
    "draw_theta_star",
    "get_link",
    "instant_regret",
    "HardInstance",
    "availability_mc",
    "f_beta",
    "kl_accumulate",
    "validate_instance",
    "Adaptive",
    "Theoretical",
    "ZoomSIB",
    "ZoomSIBConfig",
    "derive_constants",
    "DegenerateEstimateError",
    "SteinState",
]
