"""Opponent-aware tabular Q-learning: threatened-MDP agents, Bayesian
opponent models, benchmark environments and convergence verification."""

from .core import AgentConfig, Experience, QTensor, policy_from_values, q3_update, q_marginal, select_action
from .beliefs import DirichletCounts, ModelMixture, SmootherState, StateConditionedBelief

__all__ = [
    "AgentConfig",
    "Experience",
    "QTensor",
    "q3_update",
    "q_marginal",
    "select_action",
    "policy_from_values",
    "DirichletCounts",
    "StateConditionedBelief",
    "SmootherState",
    "ModelMixture",
]

__version__ = "0.1.0"
