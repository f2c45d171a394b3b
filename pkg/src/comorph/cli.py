"""Command-line entry points.

Subcommands:
  codesign   full co-design loop (morphology search + both trainers)
  ablate     same loop under a comparison mode (--mode)
  cpg-sim    integrate the oscillator network under a gait, emit a CSV
  bo-bench   GP-UCB on a named synthetic fitness function
  eval       roll out a population checkpoint greedily and report returns

Exit codes: 0 success, 2 configuration error, 3 numeric fault, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .config import ABLATION_MODES, load_config, preset_config
from .cpg import GAIT_PRESETS, CpgParams, GaitAction, simulate_gait
from .errors import ConfigError, NumericError
from .gp import BoState, GpModel, bo_round
from .harness import BENCH_FUNCTIONS, run_ablation, run_codesign
from .morphology import Morphology
from .net import forward

log = logging.getLogger("comorph")


def _add_run_args(p):
    p.add_argument("--config", help="JSON config file; keys override the preset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="output directory for reports and checkpoints")
    p.add_argument("--preset", choices=("paper", "desk"), default="desk")
    p.add_argument("--env", help="environment name override")
    p.add_argument("--iterations", type=int)
    p.add_argument("--episodes", type=int, dest="episodes_per_iteration")


def _build_config(args, mode=None):
    overrides = {"seed": args.seed}
    for key in ("env", "iterations", "episodes_per_iteration"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if mode is not None:
        overrides["ablation"] = mode
    if args.config:
        return load_config(args.config, preset=args.preset, **overrides)
    return preset_config(args.preset, **overrides)


def _cmd_codesign(args):
    log_run = run_codesign(_build_config(args), out_dir=args.out)
    last = log_run.iteration_rows[-1] if log_run.iteration_rows else None
    if last:
        print(f"completed {len(log_run.iteration_rows)} iterations; "
              f"final morphology {last['values']}; "
              f"mean return {last['mean_return']:.3f}")
    return 0


def _cmd_ablate(args):
    log_run = run_ablation(_build_config(args, mode=args.mode), out_dir=args.out)
    print(f"mode {args.mode}: {len(log_run.episode_rows)} episodes logged")
    return 0


def _parse_gait(text) -> GaitAction:
    if text in GAIT_PRESETS:
        return GAIT_PRESETS[text]
    try:
        phases = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"--gait must be one of {sorted(GAIT_PRESETS)} or "
                          f"comma-separated phases: {exc}") from exc
    if phases.size != 4:
        raise ConfigError("--gait phase list must have 4 entries")
    return GaitAction(phases)


def _cmd_cpg_sim(args):
    action = _parse_gait(args.gait)
    times, outputs, phases = simulate_gait(CpgParams(), action, args.duration, args.dt)
    stride = max(1, int(round(args.sample_dt / args.dt)))
    path = args.out or "cpg_trajectory.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"theta_{i+1}" for i in range(4)] + [f"phi_{i+1}" for i in range(4)])
        for k in range(0, times.size, stride):
            w.writerow([float(times[k])] + [float(v) for v in outputs[k]]
                       + [float(v) for v in phases[k]])
    print(f"wrote {path} ({(times.size + stride - 1) // stride} samples)")
    return 0


def _cmd_bo_bench(args):
    if args.fn not in BENCH_FUNCTIONS:
        raise ConfigError(f"unknown function {args.fn!r}; known: {sorted(BENCH_FUNCTIONS)}")
    bounds, fn, optimum = BENCH_FUNCTIONS[args.fn]
    rng = np.random.default_rng(args.seed)
    model = GpModel(bounds)
    state, best, trace = bo_round(BoState(kappa=args.kappa), model, fn,
                                  n_steps=args.steps, n_probes=args.probes, rng=rng)
    gap = float(np.linalg.norm(best.normalized() - optimum))
    print(f"best {best.values.tolist()} fitness {max(f for _, f in state.observations):.6f} "
          f"distance-to-optimum {gap:.4f} (normalized)")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "bo_bench.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "kind"] + [f"xi_{k}" for k in range(bounds.shape[0])]
                       + ["fitness", "running_best"])
            for i, row in enumerate(trace):
                w.writerow([i, row["kind"], *[float(v) for v in row["values"]],
                            row["fitness"], row["running_best"]])
        print(f"wrote {path}")
    return 0


def _cmd_eval(args):
    from .envs import make_env
    from .harness import load_population_checkpoint
    agent, extra = load_population_checkpoint(args.checkpoint)
    env = make_env(extra["env"], episode_length=extra["episode_length"],
                   **extra.get("env_kwargs", {}))
    morphology = Morphology(np.asarray(extra["morphology"]), env.spec.morphology_bounds)
    actor = agent.nets.actor
    rng = np.random.default_rng(args.seed)
    returns = []
    for _ in range(args.episodes):
        obs = env.reset(morphology, int(rng.integers(0, 2 ** 31 - 1)))
        total, done = 0.0, False
        while not done:
            obs, r, done, _ = env.step(forward(actor, obs))
            total += r
        returns.append(total)
        print(f"episode return {total:.3f}")
    print(f"mean return {float(np.mean(returns)):.3f} over {len(returns)} episodes "
          f"(morphology {extra['morphology']})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comorph",
                                     description="Morphology/controller co-design toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codesign", help="run the full co-design loop")
    _add_run_args(p)
    p.set_defaults(handler=_cmd_codesign)

    p = sub.add_parser("ablate", help="run a comparison mode")
    _add_run_args(p)
    p.add_argument("--mode", required=True,
                   choices=[m for m in ABLATION_MODES if m != "full"])
    p.set_defaults(handler=_cmd_ablate)

    p = sub.add_parser("cpg-sim", help="simulate the oscillator network")
    p.add_argument("--gait", default="trot",
                   help=f"preset ({', '.join(sorted(GAIT_PRESETS))}) or 4 comma-separated phases")
    p.add_argument("--duration", type=float, default=3.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--sample-dt", type=float, default=0.02, dest="sample_dt")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(handler=_cmd_cpg_sim)

    p = sub.add_parser("bo-bench", help="GP-UCB on a synthetic fitness function")
    p.add_argument("--fn", default="quadratic-2d")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--probes", type=int, default=30)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(handler=_cmd_bo_bench)

    p = sub.add_parser("eval", help="evaluate a population checkpoint greedily")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_eval)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except NumericError as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
