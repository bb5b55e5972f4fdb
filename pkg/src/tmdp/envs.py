"""Benchmark environments: repeated matrix games (with optional one-step
memory), the friend-or-foe target game (stateless and spatial) and a small
Blotto resource-allocation game.

Environments are single-threaded state machines with
reset() -> state and step(dm_action, opp_actions) -> (exp_dm, exp_opp)
where each Experience is written from the corresponding player's seat.
Continuing environments (`episodic = False`) never terminate; the harness
treats each of their steps as one episode for decay schedules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import ContractViolation, Experience

__all__ = [
    "MatrixGameSpec",
    "MatrixGame",
    "IPD_PAYOFFS",
    "ISH_PAYOFFS",
    "IC_PAYOFFS",
    "StatelessFriendOrFoe",
    "GridWorldSpec",
    "GridWorld",
    "BlottoSpec",
    "Blotto",
    "make_env",
    "ENV_IDS",
]

C, D = 0, 1

# Row player's and column player's payoffs; rows = DM action, cols = opponent.
IPD_PAYOFFS = (
    np.array([[-1.0, -3.0], [0.0, -2.0]]),
    np.array([[-1.0, 0.0], [-3.0, -2.0]]),
)
ISH_PAYOFFS = (
    np.array([[2.0, 0.0], [1.0, 1.0]]),
    np.array([[2.0, 1.0], [0.0, 1.0]]),
)
IC_PAYOFFS = (
    np.array([[0.0, -2.0], [1.0, -4.0]]),
    np.array([[0.0, 1.0], [-2.0, -4.0]]),
)


@dataclass
class MatrixGameSpec:
    payoff_a: np.ndarray
    payoff_b: np.ndarray
    memory: str = "none"  # or "one"
    labels: tuple[str, str] = ("C", "D")

    def __post_init__(self) -> None:
        self.payoff_a = np.asarray(self.payoff_a, dtype=float)
        self.payoff_b = np.asarray(self.payoff_b, dtype=float)
        if self.payoff_a.shape != (2, 2) or self.payoff_b.shape != (2, 2):
            raise ValueError("payoff matrices must be 2x2")
        if not (np.isfinite(self.payoff_a).all() and np.isfinite(self.payoff_b).all()):
            raise ValueError("payoff matrices must be finite")
        if self.memory not in ("none", "one"):
            raise ValueError(f"memory must be 'none' or 'one', got {self.memory!r}")


class MatrixGame:
    """Repeated 2x2 matrix game; memory-one encodes the previous joint
    action as the state (5 states: initial plus the four joint actions)."""

    episodic = False
    n_dm_actions = 2
    n_opp_actions = 2
    n_adversaries = 1

    def __init__(self, spec: MatrixGameSpec):
        self.spec = spec
        self._state = 0

    @property
    def n_states(self) -> int:
        return 5 if self.spec.memory == "one" else 1

    def reset(self) -> int:
        self._state = 0
        return self._state

    def step(self, dm_action: int, opp_actions: tuple[int, ...]):
        a, b = int(dm_action), int(opp_actions[0])
        if a not in (0, 1) or b not in (0, 1):
            raise ContractViolation("matrix game actions must be 0 (C) or 1 (D)")
        r_a = float(self.spec.payoff_a[a, b])
        r_b = float(self.spec.payoff_b[a, b])
        s = self._state
        if self.spec.memory == "one":
            next_state = 1 + 2 * a + b
        else:
            next_state = 0
        self._state = next_state
        exp_dm = Experience(s, a, (b,), r_a, (r_b,), next_state)
        # The opponent's memory-one state encodes the same joint action but
        # with his own action first.
        if self.spec.memory == "one":
            opp_next = 1 + 2 * b + a
            opp_s = 0 if s == 0 else 1 + 2 * ((s - 1) % 2) + ((s - 1) // 2)
        else:
            opp_next = 0
            opp_s = 0
        exp_opp = Experience(opp_s, b, (a,), r_b, (r_a,), opp_next)
        return exp_dm, exp_opp


class StatelessFriendOrFoe:
    """Single-state target game: the adversary hides the +reward in one of
    two targets, the DM picks a target.

    DM rewards are +50 / -50.  The adversary's reward follows the
    configured scaling: 'minimax' (-r_A), 'pm1' (+1 when the DM misses,
    -1 otherwise) or 'zero_one' (1 when the DM misses, 0 otherwise).
    """

    episodic = False
    n_states = 1
    n_dm_actions = 2
    n_opp_actions = 2
    n_adversaries = 1

    REWARD = 50.0

    def __init__(self, opp_reward_scaling: str = "minimax"):
        if opp_reward_scaling not in ("minimax", "pm1", "zero_one"):
            raise ValueError(f"unknown reward scaling {opp_reward_scaling!r}")
        self.scaling = opp_reward_scaling

    def reset(self) -> int:
        return 0

    def step(self, dm_action: int, opp_actions: tuple[int, ...]):
        dm_target, rewarded_target = int(dm_action), int(opp_actions[0])
        hit = dm_target == rewarded_target
        r_a = self.REWARD if hit else -self.REWARD
        if self.scaling == "minimax":
            r_b = -r_a
        elif self.scaling == "pm1":
            r_b = -1.0 if hit else 1.0
        else:
            r_b = 0.0 if hit else 1.0
        exp_dm = Experience(0, dm_target, (rewarded_target,), r_a, (r_b,), 0)
        exp_opp = Experience(0, rewarded_target, (dm_target,), r_b, (r_a,), 0)
        return exp_dm, exp_opp


@dataclass
class GridWorldSpec:
    """Walled room with two candidate targets.

    Default layout: 7 x 9 grid with an outer wall ring, the DM starting at
    the bottom-center interior cell and the targets in the two top interior
    corners, symmetric so neither target is closer.
    """

    width: int = 7
    height: int = 9
    walls: frozenset = field(default_factory=frozenset)
    start: tuple[int, int] = (3, 7)
    target1: tuple[int, int] = (1, 1)
    target2: tuple[int, int] = (5, 1)
    step_reward: float = -1.0
    win_reward: float = 50.0
    lose_reward: float = -50.0
    max_steps: int = 50

    def __post_init__(self) -> None:
        if not self.walls:
            ring = set()
            for x in range(self.width):
                ring.add((x, 0))
                ring.add((x, self.height - 1))
            for y in range(self.height):
                ring.add((0, y))
                ring.add((self.width - 1, y))
            self.walls = frozenset(ring)
        for cell in (self.start, self.target1, self.target2):
            if cell in self.walls:
                raise ValueError(f"cell {cell} collides with a wall")
        if self.target1 == self.target2:
            raise ValueError("targets must be distinct")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


# up, down, left, right
_MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0))


class GridWorld:
    """Spatial friend-or-foe: the DM navigates to one of two targets; the
    adversary decides (once per episode) which target pays +50, the other
    -50; every step costs -1.

    The opponent action in the DM's experiences is the adversary's rewarded
    target.  In the adversary's experiences the opponent action is the
    target the DM reached (-1 until a target is reached), so a smoother can
    track the DM's target choices.
    """

    episodic = True
    n_dm_actions = 4
    n_opp_actions = 2
    n_adversaries = 1

    NO_TARGET = -1

    def __init__(self, spec: GridWorldSpec | None = None,
                 opp_reward_scaling: str = "minimax"):
        self.spec = spec or GridWorldSpec()
        if opp_reward_scaling not in ("minimax", "pm1", "zero_one"):
            raise ValueError(f"unknown reward scaling {opp_reward_scaling!r}")
        self.scaling = opp_reward_scaling
        self._pos = self.spec.start
        self._steps = 0

    @property
    def n_states(self) -> int:
        return self.spec.width * self.spec.height

    def _encode(self, cell: tuple[int, int]) -> int:
        return cell[1] * self.spec.width + cell[0]

    def reset(self) -> int:
        self._pos = self.spec.start
        self._steps = 0
        return self._encode(self._pos)

    def reached_target(self, state: int) -> int | None:
        """Target index encoded by `state`, or None for non-target cells."""
        cell = (state % self.spec.width, state // self.spec.width)
        if cell == self.spec.target1:
            return 0
        if cell == self.spec.target2:
            return 1
        return None

    def step(self, dm_action: int, opp_actions: tuple[int, ...]):
        move = int(dm_action)
        rewarded_target = int(opp_actions[0])
        if not 0 <= move < 4:
            raise ContractViolation("gridworld move must be in {up, down, left, right}")
        s = self._encode(self._pos)
        dx, dy = _MOVES[move]
        nxt = (self._pos[0] + dx, self._pos[1] + dy)
        if nxt in self.spec.walls or not (
            0 <= nxt[0] < self.spec.width and 0 <= nxt[1] < self.spec.height
        ):
            nxt = self._pos
        self._pos = nxt
        self._steps += 1

        reached = self.NO_TARGET
        r_a = self.spec.step_reward
        terminal = False
        if nxt == self.spec.target1:
            reached = 0
        elif nxt == self.spec.target2:
            reached = 1
        if reached != self.NO_TARGET:
            terminal = True
            hit = reached == rewarded_target
            r_a += self.spec.win_reward if hit else self.spec.lose_reward
        elif self._steps >= self.spec.max_steps:
            terminal = True

        if self.scaling == "minimax":
            r_b = -r_a
        elif self.scaling == "pm1":
            r_b = 0.0 if not terminal or reached == self.NO_TARGET else (
                -1.0 if reached == rewarded_target else 1.0)
        else:
            r_b = 1.0 if terminal and reached not in (self.NO_TARGET, rewarded_target) else 0.0

        next_state = self._encode(nxt)
        exp_dm = Experience(s, move, (rewarded_target,), r_a, (r_b,), next_state, terminal)
        exp_opp = Experience(0, rewarded_target, (reached,), r_b, (r_a,), 0, terminal)
        return exp_dm, exp_opp


@dataclass
class BlottoSpec:
    positions: int = 3
    dm_resources: int = 2
    attackers: int = 2
    position_value: float = 1.0

    def __post_init__(self) -> None:
        if self.positions < 1 or self.dm_resources < 0 or self.attackers < 1:
            raise ValueError("invalid Blotto parameters")

    def allocations(self) -> list[tuple[int, ...]]:
        """All compositions of dm_resources into `positions` parts."""
        out = []
        for cuts in itertools.combinations_with_replacement(
            range(self.positions), self.dm_resources
        ):
            alloc = [0] * self.positions
            for c in cuts:
                alloc[c] += 1
            out.append(tuple(alloc))
        return sorted(out)


class Blotto:
    """Resource-allocation game: the defender spreads R resources over P
    positions, each attacker strikes one position.

    A position with more defending resources than attackers pays the
    defender +v and splits -v among its attackers; fewer pays the defender
    -v and splits +v; equal pays nothing.
    """

    episodic = False
    n_states = 1

    def __init__(self, spec: BlottoSpec | None = None):
        self.spec = spec or BlottoSpec()
        self._allocations = self.spec.allocations()
        self.n_dm_actions = len(self._allocations)
        self.n_opp_actions = self.spec.positions
        self.n_adversaries = self.spec.attackers

    def decode_allocation(self, action: int) -> tuple[int, ...]:
        return self._allocations[action]

    def reset(self) -> int:
        return 0

    def step(self, dm_action: int, opp_actions: tuple[int, ...]):
        alloc = self.decode_allocation(int(dm_action))
        attacks = tuple(int(p) for p in opp_actions)
        if len(attacks) != self.spec.attackers:
            raise ContractViolation("one attack position per attacker required")
        if sum(alloc) != self.spec.dm_resources:
            raise ContractViolation("allocation does not sum to the resource budget")
        v = self.spec.position_value
        r_dm = 0.0
        r_atk = [0.0] * self.spec.attackers
        for p in set(attacks):
            at_p = [i for i, q in enumerate(attacks) if q == p]
            d, k = alloc[p], len(at_p)
            if d > k:
                r_dm += v
                for i in at_p:
                    r_atk[i] -= v / k
            elif d < k:
                r_dm -= v
                for i in at_p:
                    r_atk[i] += v / k
        exp_dm = Experience(0, int(dm_action), attacks, r_dm, tuple(r_atk), 0)
        opp_exps = [
            Experience(0, attacks[i], (int(dm_action),), r_atk[i], (r_dm,), 0)
            for i in range(self.spec.attackers)
        ]
        return exp_dm, opp_exps


ENV_IDS = ("ipd", "ish", "ic", "ipd-mem1", "fof-stateless", "fof-grid", "blotto")


def make_env(env_id: str, **kwargs):
    """Build an environment from its CLI identifier."""
    if env_id == "ipd":
        return MatrixGame(MatrixGameSpec(*IPD_PAYOFFS))
    if env_id == "ish":
        return MatrixGame(MatrixGameSpec(*ISH_PAYOFFS))
    if env_id == "ic":
        return MatrixGame(MatrixGameSpec(*IC_PAYOFFS))
    if env_id == "ipd-mem1":
        return MatrixGame(MatrixGameSpec(*IPD_PAYOFFS, memory="one"))
    if env_id == "fof-stateless":
        return StatelessFriendOrFoe(**kwargs)
    if env_id == "fof-grid":
        return GridWorld(**kwargs)
    if env_id == "blotto":
        return Blotto(**kwargs)
    raise ValueError(f"unknown environment id {env_id!r}; known: {', '.join(ENV_IDS)}")
