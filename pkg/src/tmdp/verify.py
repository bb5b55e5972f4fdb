"""Independent oracles: the opponent-averaged Bellman operator on small
explicit models, contraction property checks, value iteration and a
convergence comparison for the tabular learning rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractViolation

__all__ = [
    "ExplicitTMDP",
    "bellman_H",
    "contraction_check",
    "value_iteration",
    "q_learning_vs_oracle",
    "random_tmdp",
    "run_contraction_suite",
    "run_oracle_suite",
]


@dataclass
class ExplicitTMDP:
    """Dense model: transition p(s'|s,a,b), reward r(s,a,b), a fixed
    opponent policy p(b|s) and a discount factor."""

    transition: np.ndarray  # (S, A, B, S)
    reward: np.ndarray      # (S, A, B)
    opp_policy: np.ndarray  # (S, B)
    gamma: float

    def __post_init__(self) -> None:
        self.transition = np.asarray(self.transition, dtype=float)
        self.reward = np.asarray(self.reward, dtype=float)
        self.opp_policy = np.asarray(self.opp_policy, dtype=float)
        S, A, B = self.reward.shape
        if self.transition.shape != (S, A, B, S):
            raise ContractViolation("transition tensor shape mismatch")
        if self.opp_policy.shape != (S, B):
            raise ContractViolation("opponent policy shape mismatch")
        if not np.allclose(self.transition.sum(axis=-1), 1.0, atol=1e-9):
            raise ContractViolation("transition rows must sum to 1")
        if not np.allclose(self.opp_policy.sum(axis=-1), 1.0, atol=1e-9):
            raise ContractViolation("opponent policy rows must sum to 1")
        if not np.isfinite(self.reward).all():
            raise ContractViolation("rewards must be finite")
        if not 0.0 <= self.gamma < 1.0:
            raise ContractViolation("gamma must be in [0, 1)")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.reward.shape


def bellman_H(tmdp: ExplicitTMDP, q: np.ndarray) -> np.ndarray:
    """One exact application of the opponent-averaged optimality operator.

    (Hq)(s,a,b) = sum_s' p(s'|s,a,b) [ r(s,a,b)
                  + gamma * max_a' E_{p(b'|s')} q(s',a',b') ].
    """
    q = np.asarray(q, dtype=float)
    if q.shape != tmdp.shape:
        raise ContractViolation(f"q has shape {q.shape}, expected {tmdp.shape}")
    # expected value per (s', a') under the opponent policy at s', then max
    v = np.einsum("sab,sb->sa", q, tmdp.opp_policy).max(axis=1)  # (S,)
    return tmdp.reward + tmdp.gamma * (tmdp.transition @ v)


def contraction_check(tmdp: ExplicitTMDP, trials: int, rng: np.random.Generator) -> float:
    """Max observed ratio ||Hq1 - Hq2||_inf / ||q1 - q2||_inf over random
    q-pairs with entries in [-10, 10]; identical pairs are skipped."""
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    worst = 0.0
    for _ in range(trials):
        q1 = rng.uniform(-10.0, 10.0, size=tmdp.shape)
        q2 = rng.uniform(-10.0, 10.0, size=tmdp.shape)
        denom = float(np.abs(q1 - q2).max())
        if denom == 0.0:
            continue
        num = float(np.abs(bellman_H(tmdp, q1) - bellman_H(tmdp, q2)).max())
        worst = max(worst, num / denom)
    return worst


def value_iteration(tmdp: ExplicitTMDP, tol: float = 1e-8, max_iter: int = 1_000_000,
                    q0: np.ndarray | None = None) -> np.ndarray:
    """Iterate the operator from `q0` (default zero) until the sup-norm
    change drops below `tol`; the contraction property bounds the result's
    distance to the fixed point by tol * gamma / (1 - gamma)."""
    if tol <= 0.0:
        raise ContractViolation("tol must be positive")
    q = np.zeros(tmdp.shape) if q0 is None else np.asarray(q0, dtype=float).copy()
    if q.shape != tmdp.shape:
        raise ContractViolation(f"q0 has shape {q.shape}, expected {tmdp.shape}")
    for _ in range(max_iter):
        nxt = bellman_H(tmdp, q)
        delta = float(np.abs(nxt - q).max())
        q = nxt
        if delta < tol:
            return q
    raise RuntimeError("value iteration failed to converge")


def q_learning_vs_oracle(tmdp: ExplicitTMDP, steps: int,
                         rng: np.random.Generator,
                         epsilon: float = 0.3,
                         q_star: np.ndarray | None = None) -> float:
    """Run the opponent-averaged tabular rule with the true opponent policy
    as belief and per-key learning rates 1 / (1 + visits); returns the
    sup-norm distance to the value-iteration fixed point."""
    S, A, B = tmdp.shape
    if q_star is None:
        q_star = value_iteration(tmdp, tol=1e-8)
    q = np.zeros((S, A, B))
    visits = np.zeros((S, A, B))
    s = 0
    states = np.arange(S)
    for _ in range(steps):
        belief = tmdp.opp_policy[s]
        b = int(rng.choice(B, p=belief))
        if rng.random() < epsilon:
            a = int(rng.integers(A))
        else:
            a = int(np.argmax(q[s] @ belief))
        s_next = int(rng.choice(states, p=tmdp.transition[s, a, b]))
        r = tmdp.reward[s, a, b]
        alpha = 1.0 / (1.0 + visits[s, a, b])
        visits[s, a, b] += 1.0
        bootstrap = float(np.max(q[s_next] @ tmdp.opp_policy[s_next]))
        q[s, a, b] = (1.0 - alpha) * q[s, a, b] + alpha * (r + tmdp.gamma * bootstrap)
        s = s_next
    return float(np.abs(q - q_star).max())


def random_tmdp(rng: np.random.Generator, n_states: int = 3, n_dm_actions: int = 2,
                n_opp_actions: int = 2, gamma: float = 0.9) -> ExplicitTMDP:
    """A random dense model with Dirichlet transition rows and uniform
    rewards in [-1, 1]."""
    S, A, B = n_states, n_dm_actions, n_opp_actions
    transition = rng.dirichlet(np.ones(S), size=(S, A, B))
    reward = rng.uniform(-1.0, 1.0, size=(S, A, B))
    opp_policy = rng.dirichlet(np.ones(B), size=S)
    return ExplicitTMDP(transition, reward, opp_policy, gamma)


def run_contraction_suite(n_tmdps: int = 20, trials: int = 1000,
                          gammas=(0.5, 0.8, 0.96), seed: int = 0) -> dict:
    """Contraction check over random models for each discount factor."""
    rng = np.random.default_rng(seed)
    results = []
    ok = True
    for gamma in gammas:
        worst = 0.0
        for _ in range(n_tmdps):
            tmdp = random_tmdp(
                rng,
                n_states=int(rng.integers(2, 6)),
                n_dm_actions=int(rng.integers(2, 4)),
                n_opp_actions=int(rng.integers(2, 4)),
                gamma=gamma,
            )
            worst = max(worst, contraction_check(tmdp, trials, rng))
        passed = worst <= gamma + 1e-9
        ok = ok and passed
        results.append({"gamma": gamma, "max_ratio": worst, "passed": passed})
    return {"suite": "contraction", "passed": ok, "results": results}


def run_oracle_suite(steps: int = 500_000, seed: int = 0, threshold: float = 0.05) -> dict:
    """Learning-rule convergence against the value-iteration fixed point on
    a fixed 2-state, 2x2-action model.

    Uses gamma = 0.5: with harmonic per-visit learning rates the error decays
    roughly like n^-(1-gamma), so large discounts would need astronomically
    many steps to pass a tight threshold.
    """
    rng = np.random.default_rng(seed)
    tmdp = random_tmdp(rng, n_states=2, n_dm_actions=2, n_opp_actions=2, gamma=0.5)
    q_star = value_iteration(tmdp, tol=1e-8)
    err = q_learning_vs_oracle(tmdp, steps, rng, q_star=q_star)
    return {
        "suite": "oracle",
        "passed": bool(err < threshold),
        "results": [{"steps": steps, "sup_error": err, "threshold": threshold}],
    }
