"""Opponent-model state: Dirichlet counts, state-conditioned beliefs,
exponential smoothing and Bayesian model mixtures."""

from __future__ import annotations

import numpy as np

from .core import ContractViolation

__all__ = [
    "DirichletCounts",
    "StateConditionedBelief",
    "SmootherState",
    "ModelMixture",
]


class DirichletCounts:
    """Dirichlet-categorical pseudo-counts over opponent actions.

    With `forget_lambda < 1` every observation first down-weights all counts
    geometrically, so the posterior tracks roughly the last 1 / (1 - lambda)
    observations.
    """

    def __init__(self, alphas, forget_lambda: float = 1.0):
        self.alphas = np.asarray(alphas, dtype=float).copy()
        if self.alphas.ndim != 1 or self.alphas.size == 0:
            raise ValueError("alphas must be a nonempty vector")
        if np.any(self.alphas < 0.0):
            raise ValueError("alphas must be nonnegative")
        if not 0.0 < forget_lambda <= 1.0:
            raise ValueError(f"forget_lambda must be in (0, 1], got {forget_lambda}")
        self.forget_lambda = float(forget_lambda)

    @classmethod
    def uniform(cls, n: int, forget_lambda: float = 1.0, strength: float = 1.0) -> "DirichletCounts":
        return cls(np.full(n, strength), forget_lambda)

    @property
    def n_actions(self) -> int:
        return self.alphas.size

    def observe(self, observed: int) -> None:
        """Reweight by the forget factor, then add one to the observed count."""
        if not 0 <= observed < self.alphas.size:
            raise ContractViolation(f"action {observed} out of range [0, {self.alphas.size})")
        if self.forget_lambda < 1.0:
            self.alphas *= self.forget_lambda
        self.alphas[observed] += 1.0

    def posterior_mean(self) -> np.ndarray:
        total = float(self.alphas.sum())
        if total <= 0.0:
            raise ContractViolation("posterior_mean requires at least one positive count")
        return self.alphas / total

    def to_jsonable(self) -> dict:
        return {"alphas": self.alphas.tolist(), "forget_lambda": self.forget_lambda}


class StateConditionedBelief:
    """Per-state opponent belief via Bayes rule: p(b|s) proportional to p(s|b) p(b).

    p(s|b) comes from exact per-action visit counts with Laplace smoothing
    `kappa`; p(b) is a flat DirichletCounts prior updated on every
    observation.  Actions that have never been observed anywhere get a
    uniform p(s|b).
    """

    def __init__(self, n_actions: int, forget_lambda: float = 1.0,
                 kappa: float = 1.0, prior_strength: float = 1.0):
        if n_actions < 1:
            raise ValueError("n_actions must be positive")
        if kappa <= 0.0:
            raise ValueError("kappa must be positive")
        self.n_actions = int(n_actions)
        self.kappa = float(kappa)
        self.action_prior = DirichletCounts.uniform(n_actions, forget_lambda, prior_strength)
        self.state_counts: list[dict[int, float]] = [{} for _ in range(n_actions)]
        self._action_totals = np.zeros(n_actions)
        self._visited: set[int] = set()

    def observe(self, state: int, action: int) -> None:
        if not 0 <= action < self.n_actions:
            raise ContractViolation(f"action {action} out of range [0, {self.n_actions})")
        counts = self.state_counts[action]
        counts[state] = counts.get(state, 0.0) + 1.0
        self._action_totals[action] += 1.0
        self._visited.add(state)
        self.action_prior.observe(action)

    def belief(self, state: int) -> np.ndarray:
        prior = self.action_prior.posterior_mean()
        n_visited = max(len(self._visited), 1)
        lik = np.empty(self.n_actions)
        for b in range(self.n_actions):
            total = self._action_totals[b]
            if total <= 0.0:
                lik[b] = 1.0 / n_visited
            else:
                c = self.state_counts[b].get(state, 0.0)
                lik[b] = (c + self.kappa) / (total + self.kappa * n_visited)
        p = lik * prior
        return p / p.sum()

    def to_jsonable(self) -> dict:
        return {
            "prior": self.action_prior.to_jsonable(),
            "kappa": self.kappa,
            "state_counts": [dict(c) for c in self.state_counts],
        }


class SmootherState:
    """Exponentially smoothed estimate of an opponent's action frequencies:
    p := beta * p + (1 - beta) * onehot(action)."""

    def __init__(self, p, beta: float):
        self.p = np.asarray(p, dtype=float).copy()
        if abs(float(self.p.sum()) - 1.0) > 1e-9 or np.any(self.p < 0):
            raise ValueError("p must be a probability vector")
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must be in (0, 1), got {beta}")
        self.beta = float(beta)

    @classmethod
    def uniform(cls, n: int, beta: float) -> "SmootherState":
        return cls(np.full(n, 1.0 / n), beta)

    def update(self, action: int) -> None:
        if not 0 <= action < self.p.size:
            raise ContractViolation(f"action {action} out of range [0, {self.p.size})")
        self.p *= self.beta
        self.p[action] += 1.0 - self.beta

    def to_jsonable(self) -> dict:
        return {"p": self.p.tolist(), "beta": self.beta}


class ModelMixture:
    """Dirichlet posterior over a finite set of opponent models.

    A model's count is incremented whenever its point prediction matches the
    observed opponent action; if no model predicted it, nothing changes.
    """

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=float).copy()
        if self.counts.ndim != 1 or self.counts.size == 0:
            raise ValueError("counts must be a nonempty vector")
        if np.any(self.counts <= 0.0):
            raise ValueError("counts must be strictly positive")

    @property
    def n_models(self) -> int:
        return self.counts.size

    def observe(self, predictions, observed: int) -> None:
        predictions = list(predictions)
        if len(predictions) != self.counts.size:
            raise ContractViolation("one prediction per model required")
        for i, pred in enumerate(predictions):
            if pred == observed:
                self.counts[i] += 1.0

    def weights(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def mixture_belief(self, per_model_beliefs) -> np.ndarray:
        """Posterior-weighted average of the member models' beliefs."""
        beliefs = [np.asarray(b, dtype=float) for b in per_model_beliefs]
        if len(beliefs) != self.counts.size:
            raise ContractViolation("one belief per model required")
        w = self.weights()
        out = np.zeros_like(beliefs[0])
        for wi, bi in zip(w, beliefs):
            out += wi * bi
        return out

    def to_jsonable(self) -> dict:
        return {"counts": self.counts.tolist(), "weights": self.weights().tolist()}
