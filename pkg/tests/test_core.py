"""Tests for Q storage, the opponent-averaged update and action selection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmdp.core import (
    AgentConfig,
    ContractViolation,
    Experience,
    QTensor,
    check_distribution,
    policy_from_values,
    q3_update,
    q_marginal,
    select_action,
)


def make_exp(state=0, a=0, b=0, r=1.0, next_state=1, terminal=False):
    return Experience(state, a, (b,), r, (-r,), next_state, terminal)


# ---------------------------------------------------------------------------
# AgentConfig validation
# ---------------------------------------------------------------------------

def test_config_accepts_stated_ranges():
    cfg = AgentConfig(alpha=1.0, gamma=0.5, epsilon=0.0, epsilon_decay=1.0)
    assert cfg.alpha == 1.0


@pytest.mark.parametrize("kwargs", [
    {"alpha": 0.0},
    {"alpha": 1.5},
    {"gamma": 1.0},
    {"gamma": 0.0},
    {"epsilon": -0.1},
    {"epsilon": 1.1},
    {"epsilon_decay": 0.0},
    {"decay_every": 0},
    {"policy_kind": "greedy"},
    {"softmax_temperature": 0.0},
    {"tie_break": "last"},
])
def test_config_rejects_out_of_range(kwargs):
    with pytest.raises(ValueError):
        AgentConfig(**kwargs)


def test_experience_requires_matching_opponent_vectors():
    with pytest.raises(ValueError):
        Experience(0, 0, (0, 1), 1.0, (0.5,), 1)


def test_swapped_exchanges_seats():
    e = Experience(3, 1, (0,), 2.0, (-2.0,), 4, terminal=True)
    s = e.swapped()
    assert (s.dm_action, s.opp_actions) == (0, (1,))
    assert (s.reward_dm, s.reward_opp) == (-2.0, (2.0,))
    assert (s.state, s.next_state, s.terminal) == (3, 4, True)


# ---------------------------------------------------------------------------
# QTensor storage semantics
# ---------------------------------------------------------------------------

def test_unwritten_key_reads_default():
    q = QTensor(2, 2, default_value=-3.0)
    assert q.get(7, 1, 0) == -3.0


def test_writes_do_not_disturb_other_states():
    q = QTensor(2, 2)
    q.set(0, 0, 0, 5.0)
    before = q.table(1).copy()
    q.set(0, 1, 1, -2.0)
    assert np.array_equal(q.table(1), before)
    assert q.get(0, 0, 0) == 5.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 1), st.integers(0, 1),
                          st.floats(-1.0, 1.0), st.integers(0, 2), st.booleans()),
                min_size=1, max_size=60))
def test_values_stay_within_reward_bound(steps):
    # |r| <= 1 and zero init => every value stays within 1 / (1 - gamma).
    cfg = AgentConfig(alpha=0.7, gamma=0.9)
    bound = 1.0 / (1.0 - cfg.gamma)
    q = QTensor(2, 2)
    for s, a, b, r, s2, term in steps:
        q3_update(q, make_exp(s, a, b, r, s2, term), np.array([0.5, 0.5]), cfg)
    for s in q.states:
        assert np.all(np.abs(q.table(s)) <= bound + 1e-9)


# ---------------------------------------------------------------------------
# q3_update
# ---------------------------------------------------------------------------

def test_terminal_update_bootstraps_zero():
    cfg = AgentConfig(alpha=0.5, gamma=0.9)
    q = QTensor(2, 2)
    new = q3_update(q, make_exp(r=1.0, terminal=True), np.array([0.5, 0.5]), cfg)
    assert new == pytest.approx(0.5)


def test_update_takes_expectation_inside_max():
    cfg = AgentConfig(alpha=0.5, gamma=0.9)
    q = QTensor(2, 2)
    q.table(1)[0] = (2.0, 2.0)
    q.table(1)[1] = (0.0, 0.0)
    new = q3_update(q, make_exp(r=1.0, next_state=1), np.array([0.5, 0.5]), cfg)
    assert new == pytest.approx(0.5 * (1.0 + 0.9 * 2.0))  # 1.4


def test_update_rejects_wrong_belief_dimension():
    q = QTensor(2, 2)
    with pytest.raises(ContractViolation):
        q3_update(q, make_exp(), np.array([1.0]), AgentConfig())


def test_repeated_updates_converge_to_operator_fixed_point():
    # 2-state, 2x2 model with a uniform opponent; compare against the dense
    # fixed point computed by value iteration in the verify module.
    from tmdp.verify import ExplicitTMDP, value_iteration

    rng = np.random.default_rng(3)
    transition = rng.dirichlet(np.ones(2), size=(2, 2, 2))
    reward = rng.uniform(-1, 1, size=(2, 2, 2))
    opp = np.full((2, 2), 0.5)
    tmdp = ExplicitTMDP(transition, reward, opp, gamma=0.6)
    q_star = value_iteration(tmdp, tol=1e-10)

    q = QTensor(2, 2)
    visits = {}
    s = 0
    for _ in range(200_000):
        a = int(rng.integers(2))
        b = int(rng.integers(2))
        s2 = int(rng.choice(2, p=transition[s, a, b]))
        key = (s, a, b)
        visits[key] = visits.get(key, 0) + 1
        cfg = AgentConfig(alpha=1.0 / visits[key], gamma=0.6)
        q3_update(q, make_exp(s, a, b, reward[s, a, b], s2), np.array([0.5, 0.5]), cfg)
        s = s2
    learned = np.stack([q.table(s) for s in range(2)])
    assert np.abs(learned - q_star).max() < 1e-3


# ---------------------------------------------------------------------------
# q_marginal
# ---------------------------------------------------------------------------

def test_marginal_weighted_average():
    q = QTensor(2, 2)
    q.set(0, 0, 0, 1.0)
    q.set(0, 0, 1, 3.0)
    assert q_marginal(q, 0, 0, np.array([0.5, 0.5])) == pytest.approx(2.0)
    assert q_marginal(q, 0, 0, np.array([1.0, 0.0])) == pytest.approx(1.0)


def test_marginal_uniform_belief_is_mean():
    rng = np.random.default_rng(0)
    q = QTensor(3, 4)
    q.table(0)[:] = rng.normal(size=(3, 4))
    uniform = np.full(4, 0.25)
    for a in range(3):
        assert q_marginal(q, 0, a, uniform) == pytest.approx(q.table(0)[a].mean())


def test_marginal_rejects_dimension_mismatch():
    q = QTensor(2, 2)
    with pytest.raises(ContractViolation):
        q_marginal(q, 0, 0, np.array([0.2, 0.3, 0.5]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 10_000))
def test_marginal_is_linear_in_belief(lam, seed):
    rng = np.random.default_rng(seed)
    q = QTensor(2, 3)
    q.table(0)[:] = rng.normal(size=(2, 3))
    p1 = rng.dirichlet(np.ones(3))
    p2 = rng.dirichlet(np.ones(3))
    mix = lam * p1 + (1 - lam) * p2
    expect = lam * q_marginal(q, 0, 0, p1) + (1 - lam) * q_marginal(q, 0, 0, p2)
    assert q_marginal(q, 0, 0, mix) == pytest.approx(expect, abs=1e-9)


# ---------------------------------------------------------------------------
# select_action / policy_from_values
# ---------------------------------------------------------------------------

def test_greedy_selects_argmax():
    cfg = AgentConfig(epsilon=0.0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        assert select_action(np.array([5.0, 1.0, 1.0]), cfg, rng) == 0


def test_tie_break_is_uniform():
    cfg = AgentConfig(epsilon=0.0)
    rng = np.random.default_rng(1)
    draws = [select_action(np.array([2.0, 2.0]), cfg, rng) for _ in range(10_000)]
    assert np.mean(draws) == pytest.approx(0.5, abs=0.02)


def test_tie_break_first_is_deterministic():
    cfg = AgentConfig(epsilon=0.0, tie_break="first")
    rng = np.random.default_rng(1)
    assert all(select_action(np.array([2.0, 2.0]), cfg, rng) == 0 for _ in range(100))


def test_softmax_symmetric_values_uniform():
    cfg = AgentConfig(policy_kind="softmax", softmax_temperature=3.7)
    rng = np.random.default_rng(2)
    draws = [select_action(np.array([0.0, 0.0]), cfg, rng) for _ in range(10_000)]
    assert np.mean(draws) == pytest.approx(0.5, abs=0.02)


def test_empty_values_rejected():
    with pytest.raises(ContractViolation):
        select_action(np.array([]), AgentConfig(), np.random.default_rng(0))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 100.0), st.floats(-50.0, 50.0), st.integers(0, 1000))
def test_greedy_choice_invariant_under_positive_affine_maps(c, d, seed):
    values = np.random.default_rng(seed).normal(size=5)
    cfg = AgentConfig(epsilon=0.0)
    a1 = select_action(values, cfg, np.random.default_rng(seed))
    a2 = select_action(c * values + d, cfg, np.random.default_rng(seed))
    assert a1 == a2


def test_policy_from_values_examples():
    assert policy_from_values(np.array([5.0, 1.0]), 0.1) == pytest.approx([0.95, 0.05])
    assert policy_from_values(np.array([3.0, 3.0]), 0.2) == pytest.approx([0.5, 0.5])
    assert policy_from_values(np.array([1.0, 2.0, 3.0]), 0.3) == pytest.approx([0.1, 0.1, 0.8])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=8), st.floats(0.0, 1.0))
def test_policy_from_values_is_a_floored_distribution(values, eps):
    p = policy_from_values(np.array(values), eps)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(p >= eps / len(values) - 1e-12)


def test_check_distribution_rejects_bad_input():
    with pytest.raises(ContractViolation):
        check_distribution(np.array([0.7, 0.7]))
    with pytest.raises(ContractViolation):
        check_distribution(np.array([1.5, -0.5]))
    with pytest.raises(ContractViolation):
        check_distribution(np.array([0.5, 0.5]), n=3)
