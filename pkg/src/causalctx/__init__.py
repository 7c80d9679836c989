"""Exact causal contextuality.

Causal measurement scenarios, their histories, Nature and Experimenter
strategies, distributions of strategies, empirical models, and exact-LP
decisions of causal contextuality and the contextual fraction.
"""

from .core import (
    CausalScenario,
    Enabling,
    ScenarioError,
    accessible,
    accessible_measurements,
    build_scenario,
    restrict_scenario,
    scenario_to_json,
    validate_scenario,
)
from .distributions import BOOLEAN, RATIONAL, Dist, mix, play_mixed, pushforward, readout_parity
from .histories import HistorySet, enumerate_histories, is_history, is_maximal, maximal_histories
from .lp import LPResult, RationalLP, solve, verify_certificate
from .models import (
    EmpiricalModel,
    check_compatibility,
    contextual_fraction,
    decide_causal_contextuality,
    decide_possibilistic,
    enumerate_deterministic_models,
    flat_model_from_tables,
    nature_mixture,
)
from .strategies import (
    EStrategy,
    NStrategy,
    enumerate_n_strategies,
    glue,
    play,
    restrict_strategy,
    validate_e_strategy,
    validate_n_strategy,
)

__version__ = "0.1.0"
