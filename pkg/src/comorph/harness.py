"""End-to-end co-design loop, ablation wiring, logging, and checkpoints.

One iteration of the loop: clear the per-morphology buffer, apply the
selected morphology, optionally warm-start the individual agent from the
population agent, run the configured number of episodes (each one: rollout,
cloning-weight update, population training on the pooled buffer, individual
training on the fresh buffer), then pick the next morphology by GP-UCB over
the population critic's fitness surrogate.

Ablation modes rewire the loop:

* full / adaptive_term - warm start plus the PD-adapted cloning weight.
* no_copy             - fresh random parameters at every iteration boundary
                        (no warm start).
* direct_copy         - warm start with the cloning weight pinned to 0.
* fixed_term          - warm start with a constant cloning weight.
* single_network      - one agent plays both roles; it trains on the pooled
                        buffer and its critic is the surrogate.
* random_sampling     - morphologies drawn uniformly instead of by BO.

The transfer modes describe what happens at a warm start, so they take
effect from the second iteration on; iteration 1 (no parameters have been
transferred yet) trains identically in every mode, which also means
comparison runs under a fixed morphology schedule share bit-identical
first-iteration trajectories and hand the same population network to each
mode at the first transfer.

Determinism: every random stream is spawned from the run seed, and log rows
hold plain Python scalars, so identical configs produce bit-identical report
files. State snapshots written at iteration boundaries restore exactly
(networks, optimizer moments, buffers, RNG states, log rows), so a resumed
run continues to the same log as an uninterrupted one.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, config_to_dict, make_config
from .envs import make_env
from .errors import ConfigError
from .gp import BoState, GpModel, bo_round
from .morphology import Morphology, random_morphology
from .net import AdamState, Mlp, init_adam
from .offline import PopulationAgent, estimate_fitness, train_offline
from .online import (BetaController, Buffers, ExplorationPolicy, IndividualAgent,
                     record_return, reset_controller, rollout_episode, train_epoch,
                     update_beta, warm_start)
from .replay import InitStateStore, ReplayBuffer, Transition
from .td3 import (ActorCritic, SmoothingNoise, Td3Params, TwinCritic,
                  make_actor_critic)

STATE_VERSION = 1
_RNG_NAMES = ("rollout", "ind_buf", "pop_buf", "train_ind", "train_pop", "bo", "morph")

# Synthetic fitness functions for the bo-bench subcommand: name ->
# (bounds, function of Morphology, known optimum in normalized units).
BENCH_FUNCTIONS = {
    "quadratic-2d": (
        np.array([[0.0, 1.0], [0.0, 1.0]]),
        lambda m: -float(np.sum((m.normalized() - np.array([0.35, 0.65])) ** 2)),
        np.array([0.35, 0.65]),
    ),
    "quadratic-1d": (
        np.array([[0.0, 1.0]]),
        lambda m: -float((m.normalized()[0] - 0.3) ** 2),
        np.array([0.3]),
    ),
}


@dataclass
class RunLog:
    config: dict
    morphology_dim: int
    episode_rows: list = field(default_factory=list)
    iteration_rows: list = field(default_factory=list)
    bo_rows: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)


def _floats(values):
    return [float(v) for v in values]


class CodesignRun:
    """Owns the full mutable state of one co-design run."""

    def __init__(self, config: ExperimentConfig, _defer_init=False):
        self.config = config
        self.log = RunLog(config=config_to_dict(config), morphology_dim=0)
        self.completed_iterations = 0
        if _defer_init:
            return
        self._build()

    def _build(self):
        cfg = self.config
        seeds = np.random.SeedSequence(cfg.seed).spawn(len(_RNG_NAMES))
        self.rngs = {name: np.random.default_rng(s) for name, s in zip(_RNG_NAMES, seeds)}

        self.env = make_env(cfg.env, episode_length=cfg.episode_length, **cfg.env_kwargs)
        spec = self.env.spec
        self.log.morphology_dim = spec.morphology_dim
        self.bounds = spec.morphology_bounds
        self.r_target = (cfg.r_target if cfg.r_target is not None
                         else spec.r_target_per_step * cfg.episode_length)

        self.params = Td3Params(
            gamma=cfg.gamma, tau=cfg.tau, batch_size=cfg.batch_size,
            policy_update_frequency=cfg.policy_update_frequency,
            noise=SmoothingNoise(cfg.policy_noise_sigma, cfg.policy_noise_clip))

        obs_dim, act_dim = spec.obs_dim, spec.action_dim
        ind_nets = make_actor_critic(obs_dim, act_dim, cfg.hidden, cfg.learning_rate,
                                     self.rngs["morph"])
        ctrl = BetaController(beta=cfg.initial_beta, kp=cfg.kp, kd=cfg.kd,
                              r_target=self.r_target, beta_min=cfg.beta_min,
                              beta_max=cfg.beta_max)
        explore = ExplorationPolicy(cfg.exploration_sigma)
        self.individual = IndividualAgent(ind_nets, ctrl, explore, cfg.initial_beta)
        if cfg.ablation == "single_network":
            self.population = PopulationAgent(ind_nets, cfg.alpha)
            self.agents_created = 1
        else:
            pop_nets = make_actor_critic(obs_dim, act_dim, cfg.hidden, cfg.learning_rate,
                                         self.rngs["morph"])
            self.population = PopulationAgent(pop_nets, cfg.alpha)
            self.agents_created = 2

        self.buffers = Buffers(
            ReplayBuffer(cfg.d_ind_capacity, seed=int(self.rngs["ind_buf"].integers(2 ** 31))),
            ReplayBuffer(cfg.d_pop_capacity, seed=int(self.rngs["pop_buf"].integers(2 ** 31))),
            InitStateStore(cfg.d_init_capacity))

        if cfg.morphology_schedule is not None:
            self.xi_new = Morphology(np.asarray(cfg.morphology_schedule[0], float),
                                     self.bounds)
        elif cfg.initial_morphology is not None:
            self.xi_new = Morphology(np.asarray(cfg.initial_morphology, float), self.bounds)
        else:
            self.xi_new = Morphology(self.bounds.mean(axis=1), self.bounds)
        self.log.counters = {"agents_created": self.agents_created, "warm_starts": 0}

    def _mode_beta0(self):
        cfg = self.config
        if cfg.ablation == "direct_copy":
            return 0.0
        if cfg.ablation == "fixed_term":
            return cfg.fixed_beta
        return cfg.initial_beta

    def _beta_adaptive(self, it):
        if it == 1:
            return True    # no transfer happened yet; every mode trains alike
        return self.config.ablation not in ("direct_copy", "fixed_term")

    # -- the loop -------------------------------------------------------------

    def run(self, out_dir=None, stop_after_iteration=None) -> RunLog:
        last = self.config.iterations if stop_after_iteration is None \
            else min(stop_after_iteration, self.config.iterations)
        for it in range(self.completed_iterations + 1, last + 1):
            self._iteration(it)
            if out_dir and it % self.config.checkpoint_every == 0:
                self._write_checkpoints(out_dir, it)
        if out_dir:
            emit_reports(self.log, out_dir)
        return self.log

    def _iteration(self, it: int):
        cfg = self.config
        self.buffers.d_ind.clear()
        xi = self.xi_new

        if it > 1:
            if cfg.ablation == "no_copy":
                # start the iteration from scratch, as if a new agent were built
                self.individual.nets = make_actor_critic(
                    self.env.spec.obs_dim, self.env.spec.action_dim, cfg.hidden,
                    cfg.learning_rate, self.rngs["morph"])
                reset_controller(self.individual.controller, cfg.initial_beta)
                self.log.counters["reinits"] = self.log.counters.get("reinits", 0) + 1
            elif cfg.ablation != "single_network":
                warm_start(self.individual, self.population.nets)
                self.individual.controller.beta = self._mode_beta0()
                self.log.counters["warm_starts"] += 1

        n_updates = cfg.updates_per_episode
        if n_updates is None:
            n_updates = cfg.episode_length
        warmup_eps = 0
        if it == 1 and cfg.warmup_steps > 0:
            warmup_eps = -(-cfg.warmup_steps // cfg.episode_length)   # ceil

        train_buffers = self.buffers
        if cfg.ablation == "single_network":
            train_buffers = Buffers(self.buffers.d_pop, self.buffers.d_pop,
                                    self.buffers.d_init)

        returns = []
        for ep in range(1, warmup_eps + cfg.episodes_per_iteration + 1):
            warm = ep <= warmup_eps
            ret = rollout_episode(self.env, self.individual.nets.actor, xi,
                                  self.individual.explore, self.buffers,
                                  self.rngs["rollout"], uniform_random=warm)
            pop_diag = {"critic_loss": np.nan, "actor_loss": np.nan}
            ind_diag = {"critic_loss": np.nan, "actor_loss": np.nan, "bc_term": np.nan}
            if not warm:
                record_return(self.individual.controller, ret)
                if self._beta_adaptive(it):
                    update_beta(self.individual.controller)
                returns.append(ret)
                if cfg.ablation != "single_network" and \
                        len(self.buffers.d_pop) >= cfg.batch_size:
                    pop_diag = train_offline(self.population, self.buffers.d_pop,
                                             n_updates, self.params, self.rngs["train_pop"])
                ind_diag = train_epoch(self.individual, train_buffers, n_updates,
                                       self.params, self.rngs["train_ind"])
            self.log.episode_rows.append({
                "iteration": it, "episode": ep if warm else ep - warmup_eps,
                "phase": "warmup" if warm else "train",
                "seed": cfg.seed, "return": float(ret),
                "beta": float(self.individual.controller.beta),
                "critic_loss": float(ind_diag["critic_loss"]),
                "actor_loss": float(ind_diag["actor_loss"]),
                "bc_term": float(ind_diag["bc_term"]),
                "pop_critic_loss": float(pop_diag["critic_loss"]),
                "pop_actor_loss": float(pop_diag["actor_loss"]),
                "d_ind_size": len(self.buffers.d_ind),
                "d_pop_size": len(self.buffers.d_pop),
                "d_init_size": len(self.buffers.d_init),
                "d_init_pushes": self.buffers.d_init.total_pushed,
            })

        bo_best = float("nan")
        if cfg.morphology_schedule is not None:
            nxt = cfg.morphology_schedule[min(it, len(cfg.morphology_schedule) - 1)]
            self.xi_new = Morphology(np.asarray(nxt, float), self.bounds)
            self.log.bo_rows.append({
                "iteration": it, "seed": cfg.seed, "index": 0, "kind": "schedule",
                "values": _floats(self.xi_new.values), "fitness": float("nan"),
                "post_mean": float("nan"), "post_var": float("nan"),
                "running_best": float("nan")})
        elif cfg.ablation == "random_sampling":
            self.xi_new = random_morphology(self.bounds, self.rngs["bo"])
            self.log.bo_rows.append({
                "iteration": it, "seed": cfg.seed, "index": 0, "kind": "random",
                "values": _floats(self.xi_new.values), "fitness": float("nan"),
                "post_mean": float("nan"), "post_var": float("nan"),
                "running_best": float("nan")})
        else:
            def evaluator(m):
                return estimate_fitness(self.population, self.buffers.d_init, m,
                                        self.rngs["bo"], cfg.fitness_samples)[0]
            model = GpModel(self.bounds, lengthscales=cfg.gp_lengthscale)
            state = BoState(kappa=cfg.kappa)
            state, best, trace = bo_round(state, model, evaluator, cfg.bo_steps,
                                          cfg.bo_probes, self.rngs["bo"])
            self.xi_new = best
            bo_best = float(max(f for _, f in state.observations))
            for idx, row in enumerate(trace):
                self.log.bo_rows.append({
                    "iteration": it, "seed": cfg.seed, "index": idx, "kind": row["kind"],
                    "values": _floats(row["values"]), "fitness": float(row["fitness"]),
                    "post_mean": float(row["post_mean"]), "post_var": float(row["post_var"]),
                    "running_best": float(row["running_best"])})

        self.log.iteration_rows.append({
            "iteration": it, "seed": cfg.seed, "values": _floats(xi.values),
            "mean_return": float(np.mean(returns)) if returns else float("nan"),
            "final_return": float(returns[-1]) if returns else float("nan"),
            "bo_best_fitness": bo_best,
            "next_values": _floats(self.xi_new.values),
            "d_ind_size": len(self.buffers.d_ind),
            "d_pop_size": len(self.buffers.d_pop),
            "d_init_size": len(self.buffers.d_init),
        })
        self.completed_iterations = it

    # -- persistence ----------------------------------------------------------

    def _write_checkpoints(self, out_dir, it):
        ckpt_dir = os.path.join(out_dir, "checkpoints")
        os.makedirs(ckpt_dir, exist_ok=True)
        state_path = os.path.join(ckpt_dir, f"state_iter_{it:03d}.npz")
        pop_path = os.path.join(ckpt_dir, f"population_iter_{it:03d}.npz")
        self.save_state(state_path)
        save_population_checkpoint(pop_path, self.population, self.config,
                                   self.log.iteration_rows[-1]["values"])
        self.log.checkpoints.append(os.path.basename(state_path))
        self.log.checkpoints.append(os.path.basename(pop_path))

    def save_state(self, path):
        arrays, meta = {}, {
            "format": "run-state",
            "version": STATE_VERSION,
            "config": config_to_dict(self.config),
            "completed_iterations": self.completed_iterations,
            "xi_new": _floats(self.xi_new.values),
            "controller": vars(self.individual.controller).copy(),
            "counters": self.log.counters,
            "morphology_dim": self.log.morphology_dim,
            "rows": {"episode": self.log.episode_rows,
                     "iteration": self.log.iteration_rows,
                     "bo": self.log.bo_rows,
                     "checkpoints": self.log.checkpoints},
            "rng": {name: g.bit_generator.state for name, g in self.rngs.items()},
            "buffer_rng": {"d_ind": self.buffers.d_ind.rng.bit_generator.state,
                           "d_pop": self.buffers.d_pop.rng.bit_generator.state},
            "single": self.config.ablation == "single_network",
        }
        _pack_actor_critic(arrays, meta, "ind", self.individual.nets)
        if not meta["single"]:
            _pack_actor_critic(arrays, meta, "pop", self.population.nets)
        _pack_buffer(arrays, meta, "d_ind", self.buffers.d_ind)
        _pack_buffer(arrays, meta, "d_pop", self.buffers.d_pop)
        states = self.buffers.d_init.all_states()
        arrays["d_init/states"] = states
        meta["d_init"] = {"capacity": self.buffers.d_init.capacity,
                          "total_pushed": self.buffers.d_init.total_pushed}
        arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), np.uint8)
        np.savez(path, **arrays)

    @classmethod
    def load_state(cls, path) -> "CodesignRun":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta.get("format") != "run-state" or meta["version"] != STATE_VERSION:
                raise ConfigError(f"unsupported run-state version {meta['version']}")
            cfg_dict = dict(meta["config"])
            cfg_dict["hidden"] = tuple(cfg_dict["hidden"])
            run = cls(make_config(**cfg_dict), _defer_init=True)
            run._build()
            run.completed_iterations = meta["completed_iterations"]
            run.xi_new = Morphology(np.asarray(meta["xi_new"]), run.bounds)
            for k, v in meta["controller"].items():
                setattr(run.individual.controller, k, v)
            run.log.counters = meta["counters"]
            run.log.morphology_dim = meta["morphology_dim"]
            run.log.episode_rows = meta["rows"]["episode"]
            run.log.iteration_rows = meta["rows"]["iteration"]
            run.log.bo_rows = meta["rows"]["bo"]
            run.log.checkpoints = meta["rows"]["checkpoints"]
            for name, g in run.rngs.items():
                g.bit_generator.state = meta["rng"][name]
            _unpack_actor_critic(data, meta, "ind", run.individual.nets)
            if meta["single"]:
                run.population.nets = run.individual.nets
            else:
                _unpack_actor_critic(data, meta, "pop", run.population.nets)
            _unpack_buffer(data, meta, "d_ind", run.buffers.d_ind)
            _unpack_buffer(data, meta, "d_pop", run.buffers.d_pop)
            run.buffers.d_ind.rng.bit_generator.state = meta["buffer_rng"]["d_ind"]
            run.buffers.d_pop.rng.bit_generator.state = meta["buffer_rng"]["d_pop"]
            d_init = InitStateStore(meta["d_init"]["capacity"])
            for s in data["d_init/states"]:
                d_init.push(s)
            d_init.total_pushed = meta["d_init"]["total_pushed"]
            run.buffers.d_init = d_init
        return run


# -- snapshot packing helpers --------------------------------------------------

_NET_FIELDS = ("actor", "actor_target", "q1", "q2", "q1_target", "q2_target")


def _ac_nets(ac: ActorCritic):
    return {"actor": ac.actor, "actor_target": ac.actor_target,
            "q1": ac.critic.q1, "q2": ac.critic.q2,
            "q1_target": ac.critic.q1_target, "q2_target": ac.critic.q2_target}


def _pack_actor_critic(arrays, meta, prefix, ac: ActorCritic):
    nets = _ac_nets(ac)
    info = {}
    for fname, net in nets.items():
        info[fname] = {"layer_sizes": net.layer_sizes, "output": net.output,
                       "output_scale": net.output_scale}
        for l, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{prefix}/{fname}/w{l}"] = w
            arrays[f"{prefix}/{fname}/b{l}"] = b
    for aname, st in (("adam_actor", ac.adam_actor), ("adam_q1", ac.adam_q1),
                      ("adam_q2", ac.adam_q2)):
        info[aname] = {"step_count": st.step_count, "learning_rate": st.learning_rate,
                       "beta1": st.beta1, "beta2": st.beta2, "epsilon": st.epsilon}
        for l in range(len(st.m_weights)):
            arrays[f"{prefix}/{aname}/mw{l}"] = st.m_weights[l]
            arrays[f"{prefix}/{aname}/mb{l}"] = st.m_biases[l]
            arrays[f"{prefix}/{aname}/vw{l}"] = st.v_weights[l]
            arrays[f"{prefix}/{aname}/vb{l}"] = st.v_biases[l]
    meta[prefix] = info


def _unpack_actor_critic(data, meta, prefix, ac: ActorCritic):
    info = meta[prefix]
    for fname, net in _ac_nets(ac).items():
        if net.layer_sizes != info[fname]["layer_sizes"]:
            raise ConfigError("snapshot architecture does not match the config")
        for l in range(len(net.weights)):
            net.weights[l][...] = data[f"{prefix}/{fname}/w{l}"]
            net.biases[l][...] = data[f"{prefix}/{fname}/b{l}"]
    for aname, st in (("adam_actor", ac.adam_actor), ("adam_q1", ac.adam_q1),
                      ("adam_q2", ac.adam_q2)):
        a = info[aname]
        st.step_count = a["step_count"]
        st.learning_rate = a["learning_rate"]
        st.beta1, st.beta2, st.epsilon = a["beta1"], a["beta2"], a["epsilon"]
        for l in range(len(st.m_weights)):
            st.m_weights[l][...] = data[f"{prefix}/{aname}/mw{l}"]
            st.m_biases[l][...] = data[f"{prefix}/{aname}/mb{l}"]
            st.v_weights[l][...] = data[f"{prefix}/{aname}/vw{l}"]
            st.v_biases[l][...] = data[f"{prefix}/{aname}/vb{l}"]


def _pack_buffer(arrays, meta, prefix, buf: ReplayBuffer):
    snap = buf.snapshot()
    meta[prefix] = {"capacity": buf.capacity, "size": len(snap),
                    "total_pushed": buf.total_pushed, "clear_count": buf.clear_count}
    if snap:
        arrays[f"{prefix}/state"] = np.stack([t.state for t in snap])
        arrays[f"{prefix}/action"] = np.stack([t.action for t in snap])
        arrays[f"{prefix}/reward"] = np.array([t.reward for t in snap])
        arrays[f"{prefix}/next_state"] = np.stack([t.next_state for t in snap])
        arrays[f"{prefix}/done"] = np.array([t.done for t in snap])
        arrays[f"{prefix}/morph"] = np.stack([t.morphology for t in snap])


def _unpack_buffer(data, meta, prefix, buf: ReplayBuffer):
    info = meta[prefix]
    if info["size"]:
        for i in range(info["size"]):
            buf.push(Transition(data[f"{prefix}/state"][i], data[f"{prefix}/action"][i],
                                float(data[f"{prefix}/reward"][i]),
                                data[f"{prefix}/next_state"][i],
                                bool(data[f"{prefix}/done"][i]),
                                data[f"{prefix}/morph"][i]))
    buf.total_pushed = info["total_pushed"]
    buf.clear_count = info["clear_count"]


def save_population_checkpoint(path, agent: PopulationAgent, config: ExperimentConfig,
                               morphology_values):
    from .net import save_checkpoint
    nets = _ac_nets(agent.nets)
    save_checkpoint(path, nets, extra={
        "kind": "population", "alpha": agent.alpha, "env": config.env,
        "env_kwargs": config.env_kwargs, "episode_length": config.episode_length,
        "morphology": _floats(morphology_values)})


def load_population_checkpoint(path):
    """Rebuild a PopulationAgent (plus the checkpoint's run metadata) from a
    population_iter_*.npz file, for evaluation or surrogate queries."""
    from .net import init_adam, load_checkpoint
    nets, _, extra = load_checkpoint(path)
    if extra.get("kind") != "population":
        raise ConfigError(f"{path} is not a population checkpoint")
    ac = ActorCritic(
        nets["actor"], nets["actor_target"],
        TwinCritic(nets["q1"], nets["q2"], nets["q1_target"], nets["q2_target"]),
        init_adam(nets["actor"]), init_adam(nets["q1"]), init_adam(nets["q2"]))
    return PopulationAgent(ac, extra["alpha"]), extra


# -- public ops -----------------------------------------------------------------

def run_codesign(config: ExperimentConfig, out_dir=None) -> RunLog:
    """Execute the full co-design loop under the configured mode."""
    return CodesignRun(config).run(out_dir=out_dir)


def run_ablation(config: ExperimentConfig, out_dir=None) -> RunLog:
    """run_codesign with an explicit comparison mode set."""
    if config.ablation == "full":
        raise ConfigError("run_ablation requires a mode other than 'full'")
    return CodesignRun(config).run(out_dir=out_dir)


# -- report emission --------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def emit_reports(log: RunLog, out_dir) -> list:
    """Write episodes/iterations/BO-trace CSVs plus a manifest; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    d = log.morphology_dim
    xi_cols = [f"xi_{k}" for k in range(d)]
    paths = []

    p = os.path.join(out_dir, "episodes.csv")
    cols = ["iteration", "episode", "phase", "seed", "return", "beta", "critic_loss",
            "actor_loss", "bc_term", "pop_critic_loss", "pop_actor_loss",
            "d_ind_size", "d_pop_size", "d_init_size", "d_init_pushes"]
    _write_csv(p, cols, [[r[c] for c in cols] for r in log.episode_rows])
    paths.append(p)

    p = os.path.join(out_dir, "iterations.csv")
    cols = ["iteration", "seed"] + xi_cols + ["mean_return", "final_return",
            "bo_best_fitness"] + [f"next_{c}" for c in xi_cols] + \
           ["d_ind_size", "d_pop_size", "d_init_size"]
    rows = [[r["iteration"], r["seed"], *r["values"], r["mean_return"], r["final_return"],
             r["bo_best_fitness"], *r["next_values"], r["d_ind_size"], r["d_pop_size"],
             r["d_init_size"]] for r in log.iteration_rows]
    _write_csv(p, cols, rows)
    paths.append(p)

    p = os.path.join(out_dir, "bo_trace.csv")
    cols = ["iteration", "seed", "index", "kind"] + xi_cols + \
           ["fitness", "post_mean", "post_var", "running_best"]
    rows = [[r["iteration"], r["seed"], r["index"], r["kind"], *r["values"], r["fitness"],
             r["post_mean"], r["post_var"], r["running_best"]] for r in log.bo_rows]
    _write_csv(p, cols, rows)
    paths.append(p)

    p = os.path.join(out_dir, "manifest.json")
    with open(p, "w") as fh:
        json.dump({"config": log.config, "counters": log.counters,
                   "checkpoints": log.checkpoints}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(p)
    return paths
