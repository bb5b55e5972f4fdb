"""The agent zoo: learners and scripted adversaries behind one interface.

Every agent implements act(state, rng) -> action, observe(experience) and
on_episode_end().  Experiences are always delivered from the agent's own
seat: `dm_action` is the agent's action and `opp_actions` its opponents'.
"""

from __future__ import annotations

import itertools
from dataclasses import replace

import numpy as np

from .beliefs import DirichletCounts, ModelMixture, SmootherState, StateConditionedBelief
from .core import (
    AgentConfig,
    Experience,
    QTensor,
    policy_from_values,
    q3_update,
    select_action,
)

__all__ = [
    "Agent",
    "IndependentQAgent",
    "FPQAgent",
    "LevelKAgent",
    "GridLevelTwoAgent",
    "MixtureAgent",
    "WolfPhcAgent",
    "TftAgent",
    "SmootherAdversary",
    "GridSmootherAdversary",
    "BlottoSmootherAttacker",
    "MultiFpqAgent",
]


class Agent:
    """Base interface; scripted agents override only what they need."""

    def act(self, state: int, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def observe(self, e: Experience) -> None:
        pass

    def on_episode_end(self) -> None:
        pass


class _Learner(Agent):
    """Shared epsilon-decay bookkeeping for config-driven learners."""

    def __init__(self, cfg: AgentConfig):
        self.cfg = replace(cfg)
        self._episodes = 0

    def on_episode_end(self) -> None:
        self._episodes += 1
        if self.cfg.epsilon_decay < 1.0 and self._episodes % self.cfg.decay_every == 0:
            self.cfg.epsilon *= self.cfg.epsilon_decay


class IndependentQAgent(_Learner):
    """Opponent-unaware baseline: plain Q(s, a) learning, the adversary is
    treated as part of the environment."""

    def __init__(self, n_actions: int, cfg: AgentConfig):
        super().__init__(cfg)
        self.n_actions = int(n_actions)
        self.q: dict[int, np.ndarray] = {}

    def _row(self, state: int) -> np.ndarray:
        row = self.q.get(state)
        if row is None:
            row = np.zeros(self.n_actions)
            self.q[state] = row
        return row

    def action_values(self, state: int) -> np.ndarray:
        return self._row(state)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self._row(state), self.cfg, rng)

    def observe(self, e: Experience) -> None:
        bootstrap = 0.0 if e.terminal else float(self._row(e.next_state).max())
        row = self._row(e.state)
        a = e.dm_action
        row[a] = (1.0 - self.cfg.alpha) * row[a] + self.cfg.alpha * (
            e.reward_dm + self.cfg.gamma * bootstrap
        )


class FPQAgent(_Learner):
    """Fictitious-play Q-learner: Q(s, a, b) plus a Bayesian belief over the
    opponent's actions, marginalized at decision time.

    The belief is either a flat DirichletCounts (stateless variant) or a
    StateConditionedBelief (per-state variant).
    """

    def __init__(self, n_dm_actions: int, n_opp_actions: int, cfg: AgentConfig,
                 belief: DirichletCounts | StateConditionedBelief | None = None):
        super().__init__(cfg)
        self.q3 = QTensor(n_dm_actions, n_opp_actions)
        if belief is None:
            belief = DirichletCounts.uniform(n_opp_actions)
        if belief_dim(belief) != n_opp_actions:
            raise ValueError("belief dimension does not match opponent action count")
        self.belief = belief

    def opponent_belief(self, state: int) -> np.ndarray:
        if isinstance(self.belief, StateConditionedBelief):
            return self.belief.belief(state)
        return self.belief.posterior_mean()

    def action_values(self, state: int) -> np.ndarray:
        """Expected utility of each own action under the current belief."""
        return self.q3.table(state) @ self.opponent_belief(state)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self.action_values(state), self.cfg, rng)

    def predicted_policy(self, state: int) -> np.ndarray:
        """This agent's own play modelled as epsilon-greedy on its values."""
        return policy_from_values(self.action_values(state), self.cfg.epsilon)

    def observe(self, e: Experience) -> None:
        b = e.opp_actions[0]
        if isinstance(self.belief, StateConditionedBelief):
            self.belief.observe(e.state, b)
        else:
            self.belief.observe(b)
        q3_update(self.q3, e, self.opponent_belief(e.next_state), self.cfg)


def belief_dim(belief: DirichletCounts | StateConditionedBelief) -> int:
    return belief.n_actions


def make_opponent_model(level: int, n_dm_actions: int, n_opp_actions: int,
                        cfgs: list[AgentConfig], forget_lambda: float = 1.0):
    """A model of the opponent as a level-`level` learner, seated on the
    opponent side (its own actions are the opponent's actions).

    `cfgs` supplies one config per hierarchy level, top first; the last one
    also parameterizes the level-1 base model.
    """
    if level < 1:
        raise ValueError("opponent model level must be >= 1")
    if level == 1:
        cfg = cfgs[0] if cfgs else AgentConfig()
        belief = DirichletCounts.uniform(n_dm_actions, forget_lambda)
        return FPQAgent(n_opp_actions, n_dm_actions, cfg, belief)
    return LevelKAgent(level, n_opp_actions, n_dm_actions, cfgs, forget_lambda)


class LevelKAgent(_Learner):
    """Level-k learner: keeps its own Q(s, a, b) and an inner model of the
    opponent as a level-(k-1) learner, trained on role-swapped experiences.

    The opponent belief used for both acting and bootstrapping is the inner
    model's epsilon-greedy policy over its estimated values.  Requires the
    opponent's reward in every experience (environments without true
    opponent rewards must supply a modelled one, e.g. zero-sum).
    """

    def __init__(self, level: int, n_dm_actions: int, n_opp_actions: int,
                 cfgs: list[AgentConfig] | None = None, inner_forget: float = 1.0):
        if level < 2:
            raise ValueError("LevelKAgent requires level >= 2; level 1 is FPQAgent")
        cfgs = list(cfgs) if cfgs else []
        while len(cfgs) < level:
            cfgs.append(replace(cfgs[-1]) if cfgs else AgentConfig())
        super().__init__(cfgs[0])
        self.level = int(level)
        self.q3 = QTensor(n_dm_actions, n_opp_actions)
        self.inner = make_opponent_model(
            level - 1, n_dm_actions, n_opp_actions, cfgs[1:], inner_forget
        )

    def opponent_belief(self, state: int) -> np.ndarray:
        return self.inner.predicted_policy(state)

    def action_values(self, state: int) -> np.ndarray:
        return self.q3.table(state) @ self.opponent_belief(state)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self.action_values(state), self.cfg, rng)

    def predicted_policy(self, state: int) -> np.ndarray:
        return policy_from_values(self.action_values(state), self.cfg.epsilon)

    def observe(self, e: Experience) -> None:
        self.inner.observe(e.swapped())
        q3_update(self.q3, e, self.opponent_belief(e.next_state), self.cfg)

    def on_episode_end(self) -> None:
        super().on_episode_end()
        self.inner.on_episode_end()


class GridLevelTwoAgent(_Learner):
    """Level-2 navigator for target-choice adversaries.

    The adversary commits to one rewarded target per episode and observes
    nothing else, so the inner model is a stateless adversary-seat learner
    over (target choice, target the DM reached), updated once per episode
    when a target is actually reached.  This keeps the opponent belief
    constant within an episode, matching the adversary's decision rhythm.
    """

    def __init__(self, n_dm_actions: int, n_opp_actions: int,
                 cfgs: list[AgentConfig] | None = None, inner_forget: float = 1.0,
                 reached_target=None):
        cfgs = list(cfgs) if cfgs else [AgentConfig()]
        super().__init__(cfgs[0])
        if reached_target is None:
            raise ValueError("reached_target decoder is required")
        self.q3 = QTensor(n_dm_actions, n_opp_actions)
        inner_cfg = cfgs[1] if len(cfgs) > 1 else replace(cfgs[0])
        self.inner = FPQAgent(
            n_opp_actions, n_opp_actions, inner_cfg,
            DirichletCounts.uniform(n_opp_actions, inner_forget),
        )
        self._reached = reached_target

    def opponent_belief(self, state: int) -> np.ndarray:
        return self.inner.predicted_policy(0)

    def action_values(self, state: int) -> np.ndarray:
        return self.q3.table(state) @ self.opponent_belief(state)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self.action_values(state), self.cfg, rng)

    def predicted_policy(self, state: int) -> np.ndarray:
        return policy_from_values(self.action_values(state), self.cfg.epsilon)

    def observe(self, e: Experience) -> None:
        q3_update(self.q3, e, self.opponent_belief(e.next_state), self.cfg)
        if not e.terminal:
            return
        reached = self._reached(e.next_state)
        if reached is None:
            return  # timeout: the adversary's choice was never revealed
        self.inner.observe(Experience(
            state=0,
            dm_action=e.opp_actions[0],
            opp_actions=(reached,),
            reward_dm=e.reward_opp[0],
            reward_opp=(e.reward_dm,),
            next_state=0,
            terminal=True,
        ))

    def on_episode_end(self) -> None:
        super().on_episode_end()
        self.inner.on_episode_end()


class MixtureAgent(_Learner):
    """Learner with a Bayesian mixture of opponent models.

    Each member is an opponent-seat model (e.g. level-1 and level-2); the
    acting and bootstrapping belief is the posterior-weighted average of the
    members' predicted policies.  Posterior counts grow whenever a member's
    greedy prediction matches the realized opponent action.
    """

    def __init__(self, n_dm_actions: int, n_opp_actions: int, cfg: AgentConfig,
                 members: list, prior_counts=None):
        super().__init__(cfg)
        if not members:
            raise ValueError("at least one opponent model required")
        self.q3 = QTensor(n_dm_actions, n_opp_actions)
        self.members = list(members)
        if prior_counts is None:
            prior_counts = np.ones(len(members))
        self.mixture = ModelMixture(prior_counts)
        if self.mixture.n_models != len(self.members):
            raise ValueError("prior_counts length must match member count")

    def opponent_belief(self, state: int) -> np.ndarray:
        return self.mixture.mixture_belief(
            [m.predicted_policy(state) for m in self.members]
        )

    def action_values(self, state: int) -> np.ndarray:
        return self.q3.table(state) @ self.opponent_belief(state)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self.action_values(state), self.cfg, rng)

    def observe(self, e: Experience) -> None:
        # Point predictions are each member's greedy action at s (ties to the
        # lowest index), compared against the realized opponent action.
        predictions = [int(np.argmax(m.action_values(e.state))) for m in self.members]
        self.mixture.observe(predictions, e.opp_actions[0])
        swapped = e.swapped()
        for m in self.members:
            m.observe(swapped)
        q3_update(self.q3, e, self.opponent_belief(e.next_state), self.cfg)

    def mixture_weights(self) -> np.ndarray:
        return self.mixture.weights()

    def on_episode_end(self) -> None:
        super().on_episode_end()
        for m in self.members:
            m.on_episode_end()


class WolfPhcAgent(_Learner):
    """Win-or-Learn-Fast policy hill-climbing.

    Maintains a mixed policy per state, hill-climbed toward the greedy
    action with step delta_win when the current policy outperforms the
    long-run average policy, delta_lose otherwise.
    """

    def __init__(self, n_actions: int, cfg: AgentConfig,
                 delta_win: float = 0.0025, delta_lose: float | None = None):
        super().__init__(cfg)
        if delta_lose is None:
            delta_lose = 4.0 * delta_win
        if delta_win <= 0 or delta_lose < delta_win:
            raise ValueError("need 0 < delta_win <= delta_lose")
        self.n_actions = int(n_actions)
        self.delta_win = float(delta_win)
        self.delta_lose = float(delta_lose)
        self.q: dict[int, np.ndarray] = {}
        self.policy: dict[int, np.ndarray] = {}
        self.avg_policy: dict[int, np.ndarray] = {}
        self.visits: dict[int, int] = {}

    def _row(self, table: dict, state: int, fill) -> np.ndarray:
        row = table.get(state)
        if row is None:
            row = fill()
            table[state] = row
        return row

    def _q(self, state: int) -> np.ndarray:
        return self._row(self.q, state, lambda: np.zeros(self.n_actions))

    def _pi(self, state: int) -> np.ndarray:
        return self._row(self.policy, state, lambda: np.full(self.n_actions, 1.0 / self.n_actions))

    def _avg(self, state: int) -> np.ndarray:
        return self._row(self.avg_policy, state, lambda: np.full(self.n_actions, 1.0 / self.n_actions))

    def act(self, state: int, rng: np.random.Generator) -> int:
        p = (1.0 - self.cfg.epsilon) * self._pi(state) + self.cfg.epsilon / self.n_actions
        return int(rng.choice(self.n_actions, p=p))

    def observe(self, e: Experience) -> None:
        q = self._q(e.state)
        a = e.dm_action
        bootstrap = 0.0 if e.terminal else float(self._q(e.next_state).max())
        q[a] = (1.0 - self.cfg.alpha) * q[a] + self.cfg.alpha * (
            e.reward_dm + self.cfg.gamma * bootstrap
        )

        self.visits[e.state] = self.visits.get(e.state, 0) + 1
        pi = self._pi(e.state)
        avg = self._avg(e.state)
        avg += (pi - avg) / self.visits[e.state]

        winning = float(pi @ q) > float(avg @ q)
        delta = self.delta_win if winning else self.delta_lose
        greedy = int(np.argmax(q))
        step = np.full(self.n_actions, -delta / (self.n_actions - 1))
        step[greedy] = delta
        np.clip(pi + step, 0.0, None, out=pi)
        pi /= pi.sum()


class TftAgent(Agent):
    """Tit-for-tat: cooperate first, then mirror the opponent's last move.
    Action 0 is cooperate."""

    COOPERATE = 0

    def __init__(self):
        self.last_opponent_action: int | None = None

    def act(self, state: int, rng: np.random.Generator) -> int:
        if self.last_opponent_action is None:
            return self.COOPERATE
        return self.last_opponent_action

    def observe(self, e: Experience) -> None:
        self.last_opponent_action = e.opp_actions[0]


class SmootherAdversary(Agent):
    """Scripted adversary that tracks the opponent's action frequencies with
    an exponential smoother and targets the least-visited option."""

    def __init__(self, n_targets: int, beta: float):
        self.st = SmootherState.uniform(n_targets, beta)

    def act(self, state: int, rng: np.random.Generator) -> int:
        return int(np.argmin(self.st.p))  # ties to the lowest index

    def observe(self, e: Experience) -> None:
        self.st.update(e.opp_actions[0])


class GridSmootherAdversary(SmootherAdversary):
    """Gridworld variant: the tracked opponent action is the target the DM
    reached, known only on terminal steps; timeouts leave the estimate
    unchanged."""

    def observe(self, e: Experience) -> None:
        reached = e.opp_actions[0]
        if e.terminal and reached >= 0:
            self.st.update(reached)


class BlottoSmootherAttacker(Agent):
    """Attacker that smooths the defender's per-position allocation
    frequencies and strikes the least-defended position.

    The smoother is fed the normalized allocation vector instead of a
    one-hot action, since the defender's action is itself a distribution of
    resources over positions.
    """

    def __init__(self, n_positions: int, beta: float, decode_allocation):
        self.st = SmootherState.uniform(n_positions, beta)
        self._decode = decode_allocation

    def act(self, state: int, rng: np.random.Generator) -> int:
        return int(np.argmin(self.st.p))

    def observe(self, e: Experience) -> None:
        alloc = np.asarray(self._decode(e.opp_actions[0]), dtype=float)
        frac = alloc / alloc.sum()
        self.st.p = self.st.beta * self.st.p + (1.0 - self.st.beta) * frac


class MultiFpqAgent(_Learner):
    """FPQ-learning against M conditionally independent adversaries.

    Q is indexed (s, a, b_1, ..., b_M); each adversary gets its own
    Dirichlet belief and expectations are taken under the product
    distribution.
    """

    def __init__(self, n_dm_actions: int, n_opp_actions: int, n_adversaries: int,
                 cfg: AgentConfig, forget_lambda: float = 1.0):
        super().__init__(cfg)
        if n_adversaries < 1:
            raise ValueError("n_adversaries must be >= 1")
        self.n_dm_actions = int(n_dm_actions)
        self.n_opp_actions = int(n_opp_actions)
        self.n_adversaries = int(n_adversaries)
        self.beliefs = [
            DirichletCounts.uniform(n_opp_actions, forget_lambda)
            for _ in range(n_adversaries)
        ]
        self.q: dict[int, np.ndarray] = {}

    def _table(self, state: int) -> np.ndarray:
        t = self.q.get(state)
        if t is None:
            t = np.zeros((self.n_dm_actions,) + (self.n_opp_actions,) * self.n_adversaries)
            self.q[state] = t
        return t

    def _joint_weights(self) -> np.ndarray:
        """Product distribution over joint adversary actions."""
        w = self.beliefs[0].posterior_mean()
        for b in self.beliefs[1:]:
            w = np.multiply.outer(w, b.posterior_mean())
        return w

    def action_values(self, state: int) -> np.ndarray:
        t = self._table(state)
        w = self._joint_weights()
        return (t.reshape(self.n_dm_actions, -1) @ w.reshape(-1))

    def act(self, state: int, rng: np.random.Generator) -> int:
        return select_action(self.action_values(state), self.cfg, rng)

    def observe(self, e: Experience) -> None:
        if len(e.opp_actions) != self.n_adversaries:
            raise ValueError("experience carries a wrong number of adversary actions")
        for belief, b in zip(self.beliefs, e.opp_actions):
            belief.observe(b)
        bootstrap = 0.0 if e.terminal else float(self.action_values(e.next_state).max())
        t = self._table(e.state)
        key = (e.dm_action,) + e.opp_actions
        t[key] = (1.0 - self.cfg.alpha) * t[key] + self.cfg.alpha * (
            e.reward_dm + self.cfg.gamma * bootstrap
        )


def joint_action_iter(n_opp_actions: int, n_adversaries: int):
    """All joint adversary action tuples, in lexicographic order."""
    return itertools.product(range(n_opp_actions), repeat=n_adversaries)
