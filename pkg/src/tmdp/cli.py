"""Command line interface: run experiments, sweep hyperparameter grids and
verify the convergence guarantees."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import harness, verify
from .envs import ENV_IDS


def _configure_logging() -> None:
    level = os.environ.get("TMDP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmdp",
        description="Opponent-aware tabular Q-learning simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment over one or more seeds")
    p_run.add_argument("--env", required=True, choices=ENV_IDS)
    p_run.add_argument("--agent-a", required=True, help="DM agent spec, e.g. fpq:forget=0.8")
    p_run.add_argument("--agent-b", required=True, help="adversary agent spec")
    p_run.add_argument("--steps", type=int, required=True,
                       help="steps (continuing envs) or episodes (episodic envs)")
    p_run.add_argument("--seeds", default="0", help="comma-separated seed list")
    p_run.add_argument("--out", default=None, help="CSV output path")
    p_run.add_argument("--snapshot-weights", action="store_true",
                       help="record mixture posterior weights per step")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--opp-reward-scaling", default=None,
                       choices=("minimax", "pm1", "zero_one"))

    p_sweep = sub.add_parser("sweep", help="Cartesian hyperparameter grid from a config file")
    p_sweep.add_argument("--config", required=True)

    p_verify = sub.add_parser("verify", help="run the contraction / convergence oracles")
    p_verify.add_argument("--suite", default="all", choices=("contraction", "oracle", "all"))
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None, help="JSON report path (default stdout)")
    return parser


def _cmd_run(args) -> int:
    seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    env_kwargs = {}
    if args.opp_reward_scaling and args.env in ("fof-stateless", "fof-grid"):
        env_kwargs["opp_reward_scaling"] = args.opp_reward_scaling
    config = harness.ExperimentConfig(
        env_id=args.env,
        agent_a=args.agent_a,
        agent_b=args.agent_b,
        budget=args.steps,
        seeds=seeds,
        env_kwargs=env_kwargs,
        out=args.out,
        snapshot_weights=args.snapshot_weights,
        jobs=args.jobs,
    )
    t0 = time.perf_counter()
    records = harness.run(config)
    elapsed = time.perf_counter() - t0
    mean = harness.mean_final_fraction(records)
    print(f"{len(records)} records over {len(seeds)} seed(s) in {elapsed:.1f}s; "
          f"DM mean reward (final 10%): {mean:.3f}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config_map = harness.load_config_file(args.config)
    rows = harness.sweep(config_map)
    for row in rows:
        print(json.dumps(row))
    return 0


def _cmd_verify(args) -> int:
    reports = []
    if args.suite in ("contraction", "all"):
        reports.append(verify.run_contraction_suite(seed=args.seed))
    if args.suite in ("oracle", "all"):
        reports.append(verify.run_oracle_suite(seed=args.seed))
    payload = json.dumps(reports, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    ok = all(r["passed"] for r in reports)
    for r in reports:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] suite={r['suite']}", file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_verify(args)
    except (harness.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
