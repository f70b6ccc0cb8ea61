"""Exact and simulated engine for sequential candidate search, evaluation and selection."""
from __future__ import annotations

__version__ = "0.1.0"

from ._core import BACKEND
from .evaluator import McEstimate, OutcomeDistribution, Verdict, compare, exact_outcome, monte_carlo
from .experiments import builtin_case, builtin_cases, check_conditions, sweep
from .indices import (
    gittins_closed_form_qL1,
    gittins_index,
    myopic_search_value,
    myopic_value,
    search_index,
    search_index_closed_form_qL1,
)
from .model import (
    CandidateState,
    Category,
    CategoryParams,
    NumericalConfig,
    Policy,
    Scenario,
    is_acceptable,
    minority_category,
    posterior,
    signal_prob,
    validate,
)
from .policies import PoolState, apply, myopic_action, optimal_action

__all__ = [
    "BACKEND",
    "CandidateState",
    "Category",
    "CategoryParams",
    "McEstimate",
    "NumericalConfig",
    "OutcomeDistribution",
    "Policy",
    "PoolState",
    "Scenario",
    "Verdict",
    "apply",
    "builtin_case",
    "builtin_cases",
    "check_conditions",
    "compare",
    "exact_outcome",
    "gittins_closed_form_qL1",
    "gittins_index",
    "is_acceptable",
    "minority_category",
    "monte_carlo",
    "myopic_action",
    "myopic_search_value",
    "myopic_value",
    "optimal_action",
    "posterior",
    "search_index",
    "search_index_closed_form_qL1",
    "signal_prob",
    "sweep",
    "validate",
]
