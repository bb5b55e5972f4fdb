"""Experiment harness: configuration, seeded replications, metric records
and CSV/JSON emission.

Each replication derives independent per-agent random streams from its
master seed, so runs are deterministic per (config, seed) and seeds can be
executed in any order or in parallel with identical results.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import agents as ag
from . import envs as envs_mod
from .core import AgentConfig, Experience

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "ConfigError",
    "parse_agent_spec",
    "build_agent",
    "run",
    "run_seed",
    "moving_average",
    "write_csv",
    "read_csv",
    "load_config_file",
    "sweep",
    "env_defaults",
]

log = logging.getLogger("tmdp")
log.setLevel(os.environ.get("TMDP_LOG", "WARNING").upper())


class ConfigError(ValueError):
    """Invalid experiment configuration, raised before any stepping."""


@dataclass
class RunRecord:
    seed: int
    step: int
    player: str
    reward: float
    cum_reward: float
    epsilon: float | None
    weights: tuple[float, ...] | None = None


@dataclass
class ExperimentConfig:
    env_id: str
    agent_a: str
    agent_b: str
    budget: int
    seeds: tuple[int, ...] = (0,)
    env_kwargs: dict = field(default_factory=dict)
    smoothing_window: int = 200
    out: str | None = None
    snapshot_weights: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")


# Hyperparameter defaults per environment family.
# Deterministic tie-breaking mirrors the common argmax convention the
# matrix-game equilibrium selection depends on (both agents start from
# all-zero values, so the very first ties decide which equilibrium the
# pair coordinates on).
_MATRIX_DEFAULTS = AgentConfig(alpha=0.3, gamma=0.96, epsilon=0.1,
                               epsilon_decay=0.995, decay_every=10,
                               tie_break="first")
_ENV_DEFAULTS: dict[str, AgentConfig] = {
    "ipd": _MATRIX_DEFAULTS,
    "ish": _MATRIX_DEFAULTS,
    "ic": _MATRIX_DEFAULTS,
    "ipd-mem1": replace(_MATRIX_DEFAULTS, alpha=0.05),
    "fof-stateless": AgentConfig(alpha=0.1, gamma=0.8, epsilon=0.1,
                                 epsilon_decay=0.995, decay_every=10),
    "fof-grid": AgentConfig(alpha=0.05, gamma=0.8, epsilon=0.99,
                            epsilon_decay=0.995, decay_every=10),
    "blotto": AgentConfig(alpha=0.1, gamma=0.96, epsilon=0.1,
                          epsilon_decay=0.995, decay_every=10),
}
DEFAULT_SMOOTHER_BETA = 0.8


def env_defaults(env_id: str) -> AgentConfig:
    try:
        return replace(_ENV_DEFAULTS[env_id])
    except KeyError:
        raise ConfigError(f"unknown environment id {env_id!r}") from None


def parse_agent_spec(spec: str) -> tuple[str, dict[str, str]]:
    """Parse 'kind' or 'kind:key=val,key=val' agent descriptors."""
    kind, _, rest = spec.partition(":")
    opts: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"bad agent option {item!r} in {spec!r}")
            opts[key.strip()] = val.strip()
    return kind.strip(), opts


def _cfg_from_opts(base: AgentConfig, opts: dict[str, str], prefix: str = "") -> AgentConfig:
    mapping = {
        "alpha": ("alpha", float),
        "gamma": ("gamma", float),
        "eps": ("epsilon", float),
        "eps_decay": ("epsilon_decay", float),
        "decay_every": ("decay_every", int),
        "policy": ("policy_kind", str),
        "temp": ("softmax_temperature", float),
        "tie": ("tie_break", str),
    }
    kwargs = {}
    for key, (attr, conv) in mapping.items():
        val = opts.get(prefix + key)
        if val is not None:
            kwargs[attr] = conv(val)
    return replace(base, **kwargs)


def build_agent(spec: str, env, seat: str, defaults: AgentConfig):
    """Construct an agent (or, for multi-adversary seats, a list of agents)
    from its descriptor string."""
    kind, opts = parse_agent_spec(spec)
    n_own = env.n_dm_actions if seat == "a" else env.n_opp_actions
    n_other = env.n_opp_actions if seat == "a" else env.n_dm_actions
    cfg = _cfg_from_opts(defaults, opts)
    beta = float(opts.get("beta", DEFAULT_SMOOTHER_BETA))

    if kind == "q":
        return ag.IndependentQAgent(n_own, cfg)
    if kind == "fpq":
        forget = float(opts.get("forget", 1.0))
        if opts.get("mem", "0") in ("1", "true", "yes"):
            belief = ag.StateConditionedBelief(n_other, forget)
        else:
            belief = ag.DirichletCounts.uniform(n_other, forget)
        return ag.FPQAgent(n_own, n_other, cfg, belief)
    if kind in ("level2", "level3", "level4", "levelk"):
        level = int(opts.get("level", kind[-1] if kind != "levelk" else 2))
        inner_cfg = _cfg_from_opts(cfg, opts, prefix="inner_")
        inner_forget = float(opts.get("forget", 1.0))
        cfgs = [cfg] + [replace(inner_cfg)] * (level - 1)
        if isinstance(env, envs_mod.GridWorld):
            # The gridworld adversary decides once per episode, so the inner
            # model works at episode granularity instead of per grid cell.
            if level != 2:
                raise ConfigError("gridworld opponent models support level=2 only")
            return ag.GridLevelTwoAgent(n_own, n_other, cfgs, inner_forget,
                                        reached_target=env.reached_target)
        return ag.LevelKAgent(level, n_own, n_other, cfgs, inner_forget)
    if kind == "mixture":
        members_desc = opts.get("members", "l1+l2")
        inner_cfg = _cfg_from_opts(cfg, opts, prefix="inner_")
        inner_forget = float(opts.get("forget", 1.0))
        members = []
        for name in members_desc.split("+"):
            if not name.startswith("l") or not name[1:].isdigit():
                raise ConfigError(f"bad mixture member {name!r}")
            lvl = int(name[1:])
            members.append(
                ag.make_opponent_model(lvl, n_own, n_other,
                                       [replace(inner_cfg)] * max(lvl, 1), inner_forget)
            )
        return ag.MixtureAgent(n_own, n_other, cfg, members)
    if kind == "wolf":
        dw = float(opts.get("delta_win", 0.0025))
        dl = float(opts.get("delta_lose", 4.0 * dw))
        return ag.WolfPhcAgent(n_own, cfg, dw, dl)
    if kind == "tft":
        return ag.TftAgent()
    if kind == "smoother":
        if isinstance(env, envs_mod.Blotto):
            return [
                ag.BlottoSmootherAttacker(env.spec.positions, beta, env.decode_allocation)
                for _ in range(env.n_adversaries)
            ]
        if isinstance(env, envs_mod.GridWorld):
            return ag.GridSmootherAdversary(env.n_opp_actions, beta)
        return ag.SmootherAdversary(n_own, beta)
    if kind == "multifpq":
        forget = float(opts.get("forget", 1.0))
        return ag.MultiFpqAgent(n_own, n_other, env.n_adversaries, cfg, forget)
    raise ConfigError(f"unknown agent kind {kind!r}")


def _validate(config: ExperimentConfig, env, agent_a, agents_b) -> None:
    n_b = len(agents_b)
    if n_b != env.n_adversaries:
        raise ConfigError(
            f"environment expects {env.n_adversaries} adversaries, agent-b spec yields {n_b}"
        )
    if isinstance(agent_a, ag.MultiFpqAgent) and agent_a.n_adversaries != n_b:
        raise ConfigError("multifpq adversary count does not match the environment")


def _as_list(x):
    return x if isinstance(x, list) else [x]


def run_seed(config: ExperimentConfig, seed: int) -> list[RunRecord]:
    """One deterministic replication: fresh environment, fresh agents."""
    env = envs_mod.make_env(config.env_id, **config.env_kwargs)
    defaults = env_defaults(config.env_id)
    streams = np.random.SeedSequence(seed).spawn(3)
    rng_a = np.random.default_rng(streams[1])
    rng_b = np.random.default_rng(streams[2])

    agent_a = build_agent(config.agent_a, env, "a", defaults)
    agents_b = _as_list(build_agent(config.agent_b, env, "b", defaults))
    _validate(config, env, agent_a, agents_b)

    b_names = ["B"] if len(agents_b) == 1 else [f"B{i+1}" for i in range(len(agents_b))]
    records: list[RunRecord] = []
    cum = {name: 0.0 for name in ["A", *b_names]}

    def eps_of(agent):
        cfg = getattr(agent, "cfg", None)
        return cfg.epsilon if cfg is not None else None

    def weights_of():
        if config.snapshot_weights and isinstance(agent_a, ag.MixtureAgent):
            return tuple(float(w) for w in agent_a.mixture_weights())
        return None

    def emit(step, exp_dm: Experience) -> None:
        cum["A"] += exp_dm.reward_dm
        records.append(RunRecord(seed, step, "A", exp_dm.reward_dm, cum["A"],
                                 eps_of(agent_a), weights_of()))
        for name, r, agent in zip(b_names, exp_dm.reward_opp, agents_b):
            cum[name] += r
            records.append(RunRecord(seed, step, name, r, cum[name], eps_of(agent)))

    if env.episodic:
        for episode in range(config.budget):
            state = env.reset()
            ep_reward_a = 0.0
            ep_reward_b = [0.0] * len(agents_b)
            exp_dm = None
            while True:
                a = agent_a.act(state, rng_a)
                bs = tuple(agent.act(state, rng_b) for agent in agents_b)
                exp_dm, exp_opp = env.step(a, bs)
                agent_a.observe(exp_dm)
                for agent, eo in zip(agents_b, _as_list(exp_opp)):
                    agent.observe(eo)
                ep_reward_a += exp_dm.reward_dm
                for i, r in enumerate(exp_dm.reward_opp):
                    ep_reward_b[i] += r
                state = exp_dm.next_state
                if exp_dm.terminal:
                    break
            agent_a.on_episode_end()
            for agent in agents_b:
                agent.on_episode_end()
            summary = Experience(0, 0, (0,) * len(agents_b), ep_reward_a,
                                 tuple(ep_reward_b), 0, True)
            emit(episode, summary)
    else:
        state = env.reset()
        for step in range(config.budget):
            a = agent_a.act(state, rng_a)
            bs = tuple(agent.act(state, rng_b) for agent in agents_b)
            exp_dm, exp_opp = env.step(a, bs)
            agent_a.observe(exp_dm)
            for agent, eo in zip(agents_b, _as_list(exp_opp)):
                agent.observe(eo)
            state = exp_dm.next_state
            # Continuing tasks count every step as an episode for decay.
            agent_a.on_episode_end()
            for agent in agents_b:
                agent.on_episode_end()
            emit(step, exp_dm)
    return records


def run(config: ExperimentConfig) -> list[RunRecord]:
    """All replications, merged in seed order; optionally in parallel."""
    # Fail fast on invalid agent/env combinations before any stepping.
    env = envs_mod.make_env(config.env_id, **config.env_kwargs)
    defaults = env_defaults(config.env_id)
    _validate(config, env,
              build_agent(config.agent_a, env, "a", defaults),
              _as_list(build_agent(config.agent_b, env, "b", defaults)))

    if config.jobs > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(run_seed, [config] * len(config.seeds), config.seeds))
    else:
        chunks = [run_seed(config, seed) for seed in config.seeds]
    records = [rec for chunk in chunks for rec in chunk]
    if config.out:
        write_csv(records, config.out)
    return records


def moving_average(series, window: int) -> np.ndarray:
    """Centered simple moving average with edge truncation."""
    if window < 1:
        raise ConfigError("window must be >= 1")
    series = np.asarray(series, dtype=float)
    n = series.size
    out = np.empty(n)
    half_lo = (window - 1) // 2
    half_hi = window // 2
    csum = np.concatenate([[0.0], np.cumsum(series)])
    for i in range(n):
        lo = max(0, i - half_lo)
        hi = min(n, i + half_hi + 1)
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return out


def _n_weight_cols(records) -> int:
    return max((len(r.weights) for r in records if r.weights is not None), default=0)


def write_csv(records: list[RunRecord], path: str) -> None:
    """Emit the record stream with the stable harness schema; mixture-weight
    columns appear only when some record carries weights."""
    n_w = _n_weight_cols(records)
    header = ["seed", "step", "player", "reward", "cum_reward", "epsilon"]
    header += [f"w_model_{i}" for i in range(n_w)]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for r in records:
                row = [r.seed, r.step, r.player, repr(r.reward), repr(r.cum_reward),
                       "" if r.epsilon is None else repr(r.epsilon)]
                if n_w:
                    ws = r.weights or ()
                    row += [repr(w) for w in ws] + [""] * (n_w - len(ws))
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"failed writing records to {path!r}: {exc}") from exc


def read_csv(path: str) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            weights = tuple(
                float(v) for k, v in row.items()
                if k.startswith("w_model_") and v not in (None, "")
            ) or None
            out.append(RunRecord(
                seed=int(row["seed"]),
                step=int(row["step"]),
                player=row["player"],
                reward=float(row["reward"]),
                cum_reward=float(row["cum_reward"]),
                epsilon=float(row["epsilon"]) if row["epsilon"] else None,
                weights=weights,
            ))
        return out


def load_config_file(path: str) -> dict[str, str]:
    """Flat key = value config format; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip()] = val.strip()
    return out


def mean_final_fraction(records, player: str = "A", fraction: float = 0.1) -> float:
    """Mean per-step reward of `player` over the final `fraction` of each
    seed's record stream, averaged across seeds."""
    per_seed: dict[int, list[float]] = {}
    for r in records:
        if r.player == player:
            per_seed.setdefault(r.seed, []).append(r.reward)
    means = []
    for rewards in per_seed.values():
        k = max(1, int(len(rewards) * fraction))
        means.append(float(np.mean(rewards[-k:])))
    return float(np.mean(means))


def sweep(config_map: dict[str, str]) -> list[dict]:
    """Cartesian hyperparameter sweep over `grid.<option>` keys applied to
    the agent-a spec; returns one summary row per grid point."""
    import itertools

    required = ("env", "agent_a", "agent_b", "budget")
    for key in required:
        if key not in config_map:
            raise ConfigError(f"sweep config missing required key {key!r}")
    seeds = tuple(int(s) for s in config_map.get("seeds", "0").split(",") if s.strip())
    grid_keys = sorted(k[len("grid."):] for k in config_map if k.startswith("grid."))
    grid_vals = [config_map[f"grid.{k}"].split(",") for k in grid_keys]
    out_dir = config_map.get("out_dir")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    base_kind, base_opts = parse_agent_spec(config_map["agent_a"])
    rows = []
    for combo in itertools.product(*grid_vals) if grid_keys else [()]:
        opts = dict(base_opts)
        opts.update({k: v.strip() for k, v in zip(grid_keys, combo)})
        spec = base_kind + (":" + ",".join(f"{k}={v}" for k, v in sorted(opts.items()))
                            if opts else "")
        cfg = ExperimentConfig(
            env_id=config_map["env"],
            agent_a=spec,
            agent_b=config_map["agent_b"],
            budget=int(config_map["budget"]),
            seeds=seeds,
            jobs=int(config_map.get("jobs", "1")),
        )
        records = run(cfg)
        if out_dir:
            tag = "_".join(f"{k}{v}" for k, v in zip(grid_keys, combo)) or "base"
            write_csv(records, os.path.join(out_dir, f"sweep_{tag}.csv"))
        row = {k: v for k, v in zip(grid_keys, combo)}
        row["mean_reward"] = mean_final_fraction(records)
        rows.append(row)
        log.info("sweep point %s -> %.3f", row, row["mean_reward"])
    if out_dir:
        with open(os.path.join(out_dir, "sweep_summary.json"), "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return rows
