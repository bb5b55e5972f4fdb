"""Q-value storage, opponent-aware update rules and action-selection policies.

The central object is the three-argument action-value table Q(s, a, b): the
decision maker's value of playing `a` in state `s` while the opponent plays
`b`.  Learning averages the bootstrap over a belief about the opponent's next
action, and acting marginalizes Q over the current belief.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AgentConfig",
    "Experience",
    "QTensor",
    "q3_update",
    "q_marginal",
    "select_action",
    "policy_from_values",
    "check_distribution",
]

_DIST_TOL = 1e-9


class ContractViolation(ValueError):
    """A caller broke an operation's precondition."""


def check_distribution(p: np.ndarray, n: int | None = None) -> np.ndarray:
    """Validate that `p` is a probability vector (optionally of length n)."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ContractViolation(f"expected a 1-d distribution, got shape {p.shape}")
    if n is not None and p.size != n:
        raise ContractViolation(f"distribution has length {p.size}, expected {n}")
    if np.any(p < -_DIST_TOL):
        raise ContractViolation("distribution has negative entries")
    if abs(float(p.sum()) - 1.0) > 1e-6:
        raise ContractViolation(f"distribution sums to {p.sum()}, expected 1")
    return p


@dataclass
class AgentConfig:
    """Learning hyperparameters shared by all tabular learners.

    epsilon decays multiplicatively by `epsilon_decay` once every
    `decay_every` episodes; `epsilon_decay = 1.0` disables decay.
    """

    alpha: float = 0.1
    gamma: float = 0.96
    epsilon: float = 0.1
    epsilon_decay: float = 1.0
    decay_every: int = 10
    policy_kind: str = "epsilon_greedy"  # or "softmax"
    softmax_temperature: float = 1.0
    tie_break: str = "random"  # or "first"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError(f"epsilon_decay must be in (0, 1], got {self.epsilon_decay}")
        if self.decay_every < 1:
            raise ValueError(f"decay_every must be positive, got {self.decay_every}")
        if self.policy_kind not in ("epsilon_greedy", "softmax"):
            raise ValueError(f"unknown policy_kind {self.policy_kind!r}")
        if self.softmax_temperature <= 0.0:
            raise ValueError("softmax_temperature must be positive")
        if self.tie_break not in ("random", "first"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


@dataclass
class Experience:
    """One joint transition: (s, a, b-vector, r_dm, r_opp-vector, s', terminal)."""

    state: int
    dm_action: int
    opp_actions: tuple[int, ...]
    reward_dm: float
    reward_opp: tuple[float, ...]
    next_state: int
    terminal: bool = False

    def __post_init__(self) -> None:
        self.opp_actions = tuple(int(b) for b in self.opp_actions)
        self.reward_opp = tuple(float(r) for r in self.reward_opp)
        if len(self.opp_actions) != len(self.reward_opp) or not self.opp_actions:
            raise ValueError("opp_actions and reward_opp must have equal length >= 1")

    def swapped(self) -> "Experience":
        """The same transition viewed from the (single) opponent's seat."""
        if len(self.opp_actions) != 1:
            raise ValueError("swapped() is only defined for a single opponent")
        return Experience(
            state=self.state,
            dm_action=self.opp_actions[0],
            opp_actions=(self.dm_action,),
            reward_dm=self.reward_opp[0],
            reward_opp=(self.reward_dm,),
            next_state=self.next_state,
            terminal=self.terminal,
        )


class QTensor:
    """Sparse table Q(s, a, b) stored as one (n_dm x n_opp) array per state.

    Unwritten states read as `default_value`; touching one state never
    perturbs the values stored for another.
    """

    def __init__(self, n_dm_actions: int, n_opp_actions: int, default_value: float = 0.0):
        if n_dm_actions < 1 or n_opp_actions < 1:
            raise ValueError("action counts must be positive")
        self.n_dm_actions = int(n_dm_actions)
        self.n_opp_actions = int(n_opp_actions)
        self.default_value = float(default_value)
        self._tables: dict[int, np.ndarray] = {}

    def table(self, state: int) -> np.ndarray:
        """The (n_dm x n_opp) slice for `state`, allocated on first access."""
        t = self._tables.get(state)
        if t is None:
            t = np.full((self.n_dm_actions, self.n_opp_actions), self.default_value)
            self._tables[state] = t
        return t

    def get(self, state: int, dm_action: int, opp_action: int) -> float:
        t = self._tables.get(state)
        if t is None:
            return self.default_value
        return float(t[dm_action, opp_action])

    def set(self, state: int, dm_action: int, opp_action: int, value: float) -> None:
        self.table(state)[dm_action, opp_action] = value

    @property
    def states(self) -> list[int]:
        return list(self._tables)


def q3_update(q: QTensor, e: Experience, belief_next: np.ndarray, cfg: AgentConfig) -> float:
    """Opponent-averaged Q update at key (s, a, b); returns the new value.

    The bootstrap is max over own actions of the expectation of Q(s', a', .)
    under `belief_next` (expectation inside the max); terminal transitions
    bootstrap 0.
    """
    belief_next = check_distribution(belief_next, q.n_opp_actions)
    b = e.opp_actions[0]
    if e.terminal:
        bootstrap = 0.0
    else:
        bootstrap = float(np.max(q.table(e.next_state) @ belief_next))
    t = q.table(e.state)
    new = (1.0 - cfg.alpha) * t[e.dm_action, b] + cfg.alpha * (e.reward_dm + cfg.gamma * bootstrap)
    t[e.dm_action, b] = new
    return float(new)


def q_marginal(q: QTensor, state: int, dm_action: int, belief: np.ndarray) -> float:
    """Expected Q(s, a, .) under the opponent belief; pure."""
    belief = check_distribution(belief, q.n_opp_actions)
    t = q._tables.get(state)
    if t is None:
        return q.default_value  # belief sums to 1
    return float(t[dm_action] @ belief)


def _argmax_indices(values: np.ndarray) -> np.ndarray:
    m = values.max()
    return np.flatnonzero(values >= m)


def select_action(values: np.ndarray, cfg: AgentConfig, rng: np.random.Generator) -> int:
    """Sample an action from the configured policy over `values`.

    epsilon-greedy breaks argmax ties uniformly at random; softmax samples
    with probability proportional to exp(value / temperature).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ContractViolation("empty value vector")
    if cfg.policy_kind == "softmax":
        z = values / cfg.softmax_temperature
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        return int(rng.choice(values.size, p=p))
    if rng.random() < cfg.epsilon:
        return int(rng.integers(values.size))
    maxima = _argmax_indices(values)
    if maxima.size == 1 or cfg.tie_break == "first":
        return int(maxima[0])
    return int(maxima[rng.integers(maxima.size)])


def policy_from_values(values: np.ndarray, epsilon: float) -> np.ndarray:
    """Explicit epsilon-greedy distribution: (1 - eps) split over maximizers
    plus eps / n everywhere."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ContractViolation("empty value vector")
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"epsilon must be in [0, 1], got {epsilon}")
    n = values.size
    p = np.full(n, epsilon / n)
    maxima = _argmax_indices(values)
    p[maxima] += (1.0 - epsilon) / maxima.size
    return p
