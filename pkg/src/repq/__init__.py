"""Reputation dynamics in the randomly matched Prisoner's Dilemma.

Tabular Q-learning agents play a donation game conditioned on binary
reputations assigned by a social norm -- exogenous and centralized, or
learned and decentralized -- with optional seeded (fixed-strategy) agents
and introspective reward shaping, plus an analytical evolutionary
stability baseline.
"""

from .analysis import PolicyCensus, aggregate, census_qtables, extract_norm, extract_rule
from .egt import (
    StabilityVerdict,
    StationaryReputation,
    mutant_payoff,
    resident_payoff,
    stability_scan,
    stationary_good_fraction,
)
from .engine import EpisodeRecord, RunResult, SimConfig, SimState, run_encounter, run_episode, run_simulation
from .game import (
    COOPERATE,
    DEFECT,
    PayoffParams,
    assign_with_error,
    norm_judgment,
    payoff,
    rule_action,
)
from .learning import (
    TERMINAL,
    LearnerParams,
    Transition,
    introspective_reward,
    learn_episode,
    new_qtable,
    q_update,
    select_action,
)

__version__ = "0.1.0"

__all__ = [
    "COOPERATE",
    "DEFECT",
    "TERMINAL",
    "EpisodeRecord",
    "LearnerParams",
    "PayoffParams",
    "PolicyCensus",
    "RunResult",
    "SimConfig",
    "SimState",
    "StabilityVerdict",
    "StationaryReputation",
    "Transition",
    "aggregate",
    "assign_with_error",
    "census_qtables",
    "extract_norm",
    "extract_rule",
    "introspective_reward",
    "learn_episode",
    "mutant_payoff",
    "new_qtable",
    "norm_judgment",
    "payoff",
    "q_update",
    "resident_payoff",
    "rule_action",
    "run_encounter",
    "run_episode",
    "run_simulation",
    "select_action",
    "stability_scan",
    "stationary_good_fraction",
]
