"""Tests for the agent zoo: learners, opponent models and scripted players."""

import numpy as np
import pytest

from tmdp.agents import (
    FPQAgent,
    GridLevelTwoAgent,
    IndependentQAgent,
    LevelKAgent,
    MixtureAgent,
    MultiFpqAgent,
    TftAgent,
    WolfPhcAgent,
    make_opponent_model,
)
from tmdp.beliefs import DirichletCounts
from tmdp.core import AgentConfig, Experience
from tmdp.envs import GridWorld, StatelessFriendOrFoe, make_env


def exp(state=0, a=0, b=0, r=0.0, r_opp=None, next_state=0, terminal=False):
    return Experience(state, a, (b,), r, (r_opp if r_opp is not None else -r,),
                      next_state, terminal)


GREEDY = AgentConfig(epsilon=0.0)


# ---------------------------------------------------------------------------
# FPQAgent
# ---------------------------------------------------------------------------

def test_fpq_dominant_action_ignores_belief():
    agent = FPQAgent(2, 2, GREEDY)
    agent.q3.table(0)[0] = (0.0, 0.0)
    agent.q3.table(0)[1] = (5.0, 5.0)
    assert agent.act(0, np.random.default_rng(0)) == 1


def test_fpq_belief_tilts_the_choice():
    agent = FPQAgent(2, 2, GREEDY)
    agent.q3.table(0)[0] = (10.0, -10.0)
    agent.q3.table(0)[1] = (0.0, 0.0)
    agent.belief = DirichletCounts([9.0, 1.0])  # expected payoff 8 vs 0
    assert agent.act(0, np.random.default_rng(0)) == 0
    agent.belief = DirichletCounts([1.0, 9.0])  # expected payoff -8 vs 0
    assert agent.act(0, np.random.default_rng(0)) == 1


def test_fpq_single_observation_updates_posterior():
    agent = FPQAgent(2, 2, AgentConfig())
    agent.observe(exp(b=0))
    assert agent.opponent_belief(0) == pytest.approx([2 / 3, 1 / 3])


def test_fpq_best_responds_to_always_defect():
    # Stateless IPD against a fixed defector: the greedy action settles on D.
    env = make_env("ipd")
    agent = FPQAgent(2, 2, AgentConfig(alpha=0.3, gamma=0.96, epsilon=0.1))
    rng = np.random.default_rng(0)
    s = env.reset()
    for _ in range(2_000):
        a = agent.act(s, rng)
        e, _ = env.step(a, (1,))
        agent.observe(e)
        s = e.next_state
    assert int(np.argmax(agent.action_values(s))) == 1


# ---------------------------------------------------------------------------
# Independent Q
# ---------------------------------------------------------------------------

def test_independent_q_converges_on_fixed_bandit():
    agent = IndependentQAgent(2, AgentConfig(alpha=0.5, gamma=0.5, epsilon=0.0))
    for _ in range(100):
        agent.observe(exp(a=0, r=1.0))
        agent.observe(exp(a=1, r=0.0))
    assert agent.action_values(0)[0] == pytest.approx(2.0, rel=1e-3)  # 1/(1-γ)
    assert agent.act(0, np.random.default_rng(0)) == 0


def test_epsilon_decays_on_schedule():
    agent = IndependentQAgent(2, AgentConfig(epsilon=0.8, epsilon_decay=0.5, decay_every=10))
    for i in range(25):
        agent.on_episode_end()
    assert agent.cfg.epsilon == pytest.approx(0.8 * 0.5**2)


# ---------------------------------------------------------------------------
# Level-k
# ---------------------------------------------------------------------------

def test_level_k_requires_at_least_two():
    with pytest.raises(ValueError):
        LevelKAgent(1, 2, 2)


def test_inner_model_matches_standalone_opponent_seat_learner():
    # The level-2 inner model must equal an opponent-seat FPQ learner fed the
    # same role-swapped stream.
    cfg = AgentConfig(alpha=0.3, gamma=0.9, epsilon=0.2)
    agent = LevelKAgent(2, 2, 2, [cfg, cfg], inner_forget=0.8)
    standalone = FPQAgent(2, 2, cfg, DirichletCounts.uniform(2, 0.8))
    rng = np.random.default_rng(0)
    for _ in range(300):
        e = exp(a=int(rng.integers(2)), b=int(rng.integers(2)),
                r=float(rng.normal()))
        agent.observe(e)
        standalone.observe(e.swapped())
    assert agent.inner.opponent_belief(0) == pytest.approx(standalone.opponent_belief(0))
    assert np.array_equal(agent.inner.q3.table(0), standalone.q3.table(0))


def test_deeper_hierarchy_nests_by_one_level():
    agent = LevelKAgent(4, 2, 2)
    assert agent.inner.level == 3
    assert agent.inner.inner.level == 2
    assert isinstance(agent.inner.inner.inner, FPQAgent)


def test_agents_are_deterministic_given_seeds():
    def trajectory():
        env = StatelessFriendOrFoe()
        a = LevelKAgent(2, 2, 2, [AgentConfig()], inner_forget=0.8)
        rng = np.random.default_rng(42)
        actions = []
        s = env.reset()
        for _ in range(200):
            act = a.act(s, rng)
            e, _ = env.step(act, (0,))
            a.observe(e)
            a.on_episode_end()
            actions.append(act)
        return actions

    assert trajectory() == trajectory()


def test_single_member_mixture_equals_plain_level_three():
    # A mixture whose only member is a level-2 opponent model is the same
    # decision rule as a level-3 learner; trajectories must coincide.
    def run(make_agent):
        env = StatelessFriendOrFoe()
        agent = make_agent()
        opp = FPQAgent(2, 2, AgentConfig(), DirichletCounts.uniform(2, 0.8))
        rng_a, rng_b = np.random.default_rng(1), np.random.default_rng(2)
        s = env.reset()
        actions = []
        for _ in range(300):
            a = agent.act(s, rng_a)
            b = opp.act(s, rng_b)
            e, eo = env.step(a, (b,))
            agent.observe(e)
            opp.observe(eo)
            agent.on_episode_end()
            opp.on_episode_end()
            actions.append(a)
        return actions

    cfg = AgentConfig()
    mix = run(lambda: MixtureAgent(2, 2, cfg,
                                   [make_opponent_model(2, 2, 2, [cfg, cfg])]))
    lvl3 = run(lambda: LevelKAgent(3, 2, 2, [cfg, cfg, cfg]))
    assert mix == lvl3


def test_mixture_weights_form_distribution():
    cfg = AgentConfig()
    members = [make_opponent_model(1, 2, 2, [cfg]),
               make_opponent_model(2, 2, 2, [cfg, cfg])]
    agent = MixtureAgent(2, 2, cfg, members)
    rng = np.random.default_rng(0)
    for _ in range(100):
        agent.observe(exp(a=int(rng.integers(2)), b=int(rng.integers(2)),
                          r=float(rng.normal())))
    w = agent.mixture_weights()
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w > 0)


# ---------------------------------------------------------------------------
# Gridworld level-2
# ---------------------------------------------------------------------------

def grid_level2():
    env = GridWorld()
    cfg = AgentConfig(alpha=0.1, gamma=0.8, epsilon=0.1)
    return env, GridLevelTwoAgent(4, 2, [cfg, cfg], 0.8,
                                  reached_target=env.reached_target)


def test_grid_belief_constant_within_episode():
    env, agent = grid_level2()
    rng = np.random.default_rng(0)
    s = env.reset()
    beliefs = []
    while True:
        beliefs.append(agent.opponent_belief(s))
        a = agent.act(s, rng)
        e, _ = env.step(a, (0,))
        agent.observe(e)
        s = e.next_state
        if e.terminal:
            break
    first = beliefs[0]
    assert all(np.array_equal(b, first) for b in beliefs)


def test_grid_inner_updates_only_on_target_reach():
    env, agent = grid_level2()
    before = agent.inner.opponent_belief(0).copy()
    env.reset()
    for _ in range(50):  # bump the wall until timeout
        e, _ = env.step(1, (0,))
        agent.observe(e)
    assert e.terminal
    assert np.array_equal(agent.inner.opponent_belief(0), before)

    env.reset()
    for move in [2, 2] + [0] * 6:  # walk into target 1
        e, _ = env.step(move, (0,))
        agent.observe(e)
    assert e.terminal
    assert not np.array_equal(agent.inner.opponent_belief(0), before)


# ---------------------------------------------------------------------------
# WoLF-PHC
# ---------------------------------------------------------------------------

def test_wolf_policy_rows_stay_distributions():
    agent = WolfPhcAgent(3, AgentConfig(alpha=0.1, gamma=0.9, epsilon=0.1))
    rng = np.random.default_rng(0)
    for _ in range(100_000):
        agent.observe(Experience(int(rng.integers(4)), int(rng.integers(3)),
                                 (0,), float(rng.normal()), (0.0,),
                                 int(rng.integers(4))))
    for s, pi in agent.policy.items():
        assert pi.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(pi >= 0)


def test_wolf_equal_deltas_reduce_to_plain_hill_climbing():
    # With delta_win == delta_lose the win/lose test is irrelevant: the policy
    # must follow the same trajectory as a fixed-step hill climber.
    delta = 0.01
    agent = WolfPhcAgent(2, AgentConfig(alpha=0.5, gamma=0.5, epsilon=0.0),
                         delta_win=delta, delta_lose=delta)
    q = np.zeros(2)
    pi = np.full(2, 0.5)
    rng = np.random.default_rng(0)
    for _ in range(500):
        a = int(rng.integers(2))
        r = 1.0 if a == 0 else -1.0
        agent.observe(exp(a=a, r=r))
        q[a] = 0.5 * q[a] + 0.5 * (r + 0.5 * q.max())
        step = np.full(2, -delta)
        step[int(np.argmax(q))] = delta
        pi = np.clip(pi + step, 0.0, None)
        pi /= pi.sum()
        assert agent.policy[0] == pytest.approx(pi)
    assert pi[0] > 0.99


def test_wolf_delta_validation():
    with pytest.raises(ValueError):
        WolfPhcAgent(2, AgentConfig(), delta_win=0.01, delta_lose=0.001)


# ---------------------------------------------------------------------------
# Scripted agents
# ---------------------------------------------------------------------------

def test_tft_matches_formal_map():
    agent = TftAgent()
    rng = np.random.default_rng(0)
    stream = [int(rng.integers(2)) for _ in range(50)]
    assert agent.act(0, rng) == 0  # opens with cooperate
    for t, b in enumerate(stream):
        agent.observe(exp(a=0, b=b))
        assert agent.act(0, rng) == b


# ---------------------------------------------------------------------------
# Multi-adversary FPQ
# ---------------------------------------------------------------------------

def test_multi_fpq_degenerate_beliefs_pick_the_joint_entry():
    agent = MultiFpqAgent(2, 3, 2, GREEDY)
    agent._table(0)[1, 2, 0] = 7.0
    agent.beliefs[0] = DirichletCounts([0.0, 0.0, 1.0])
    agent.beliefs[1] = DirichletCounts([1.0, 0.0, 0.0])
    assert agent.action_values(0) == pytest.approx([0.0, 7.0])


def test_multi_fpq_uniform_beliefs_average_all_entries():
    agent = MultiFpqAgent(1, 3, 2, GREEDY)
    rng = np.random.default_rng(0)
    agent._table(0)[:] = rng.normal(size=(1, 3, 3))
    assert agent.action_values(0)[0] == pytest.approx(agent._table(0).mean())


def test_multi_fpq_checks_adversary_count():
    agent = MultiFpqAgent(2, 3, 2, GREEDY)
    with pytest.raises(ValueError):
        agent.observe(exp(b=0))
