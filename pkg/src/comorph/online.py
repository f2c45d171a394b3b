"""Individual-network trainer: online TD3 with an adaptive cloning weight.

The behavior-cloning weight beta follows a proportional-derivative rule on
episodic returns: delta = kp * (r_current - r_target)
+ kd * max(0, r_last - r_current), clamped to [beta_min, beta_max] after every
update. Returns below target push beta down (more improvement, less cloning);
a drop relative to the previous episode pushes it up.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .morphology import Morphology
from .net import forward
from .replay import InitStateStore, ReplayBuffer, Transition
from .td3 import ActorCritic, Td3Params, copy_actor_critic, train_step

log = logging.getLogger(__name__)


@dataclass
class Buffers:
    d_ind: ReplayBuffer
    d_pop: ReplayBuffer
    d_init: InitStateStore


@dataclass
class BetaController:
    beta: float = 0.4
    kp: float = 3e-5
    kd: float = 8e-5
    r_target: float = 0.0
    r_last: float = 0.0
    r_current: float = 0.0
    beta_min: float = 0.0
    beta_max: float = 1.0


def record_return(ctrl: BetaController, episodic_return: float) -> None:
    """Shift the return history after a finished episode."""
    ctrl.r_last = ctrl.r_current
    ctrl.r_current = float(episodic_return)


def beta_delta(ctrl: BetaController) -> float:
    return (ctrl.kp * (ctrl.r_current - ctrl.r_target)
            + ctrl.kd * max(0.0, ctrl.r_last - ctrl.r_current))


def update_beta(ctrl: BetaController) -> BetaController:
    """Apply the PD rule and clamp; returns the controller for chaining."""
    ctrl.beta = float(np.clip(ctrl.beta + beta_delta(ctrl), ctrl.beta_min, ctrl.beta_max))
    return ctrl


def reset_controller(ctrl: BetaController, beta0: float) -> None:
    ctrl.beta = float(np.clip(beta0, ctrl.beta_min, ctrl.beta_max))
    ctrl.r_last = 0.0
    ctrl.r_current = 0.0


@dataclass
class ExplorationPolicy:
    action_noise_sigma: float = 0.1
    action_low: np.ndarray = None
    action_high: np.ndarray = None

    def __post_init__(self):
        if self.action_low is not None and self.action_high is not None:
            if not np.all(np.asarray(self.action_low) < np.asarray(self.action_high)):
                raise ValueError("action_low must be elementwise below action_high")


@dataclass
class IndividualAgent:
    nets: ActorCritic
    controller: BetaController
    explore: ExplorationPolicy
    initial_beta: float = 0.4


def greedy_action(actor, obs) -> np.ndarray:
    return forward(actor, obs)


def rollout_episode(env, actor, morphology: Morphology, explore: ExplorationPolicy,
                    buffers: Buffers, rng, greedy=False, uniform_random=False) -> float:
    """Run one episode, pushing transitions to d_ind and d_pop and the start
    state (core part, without the morphology tail) to d_init. Returns the sum
    of rewards. A step that raises leaves the buffers without that step."""
    seed = int(rng.integers(0, 2 ** 31 - 1))
    obs = env.reset(morphology, seed)
    core_dim = env.spec.state_dim
    buffers.d_init.push(obs[:core_dim])
    low = -1.0 if explore.action_low is None else np.asarray(explore.action_low)
    high = 1.0 if explore.action_high is None else np.asarray(explore.action_high)
    total = 0.0
    done = False
    while not done:
        if uniform_random:
            a = rng.uniform(low, high, size=env.spec.action_dim)
        else:
            a = greedy_action(actor, obs)
            if not greedy:
                a = a + rng.normal(0.0, explore.action_noise_sigma, size=a.shape)
            a = np.clip(a, low, high)
        obs2, reward, done, _ = env.step(a)
        t = Transition(obs, a, reward, obs2, done, morphology.values)
        buffers.d_ind.push(t)
        buffers.d_pop.push(t)
        total += reward
        obs = obs2
    return total


def train_epoch(agent: IndividualAgent, buffers: Buffers, n_updates: int,
                params: Td3Params, rng) -> dict:
    """n_updates TD3 iterations on d_ind batches with the current beta as the
    cloning weight. Skips (with a warning) while d_ind is still smaller than
    one batch."""
    if len(buffers.d_ind) < params.batch_size:
        log.warning("skipping online training: %d transitions < batch size %d",
                    len(buffers.d_ind), params.batch_size)
        return {"updates": 0, "critic_loss": np.nan, "actor_loss": np.nan, "bc_term": np.nan}
    c_losses, a_losses, bc_terms = [], [], []
    for i in range(n_updates):
        batch = buffers.d_ind.sample_arrays(params.batch_size)
        do_actor = (i + 1) % params.policy_update_frequency == 0
        diag = train_step(agent.nets, batch, params.gamma, params.noise, rng,
                          agent.controller.beta, params.tau, do_actor)
        c_losses.append(diag["critic_loss"])
        if do_actor:
            a_losses.append(diag["actor_loss"])
            bc_terms.append(diag["bc_term"])
    return {
        "updates": n_updates,
        "critic_loss": float(np.mean(c_losses)) if c_losses else np.nan,
        "actor_loss": float(np.mean(a_losses)) if a_losses else np.nan,
        "bc_term": float(np.mean(bc_terms)) if bc_terms else np.nan,
    }


def warm_start(agent: IndividualAgent, population_nets: ActorCritic) -> None:
    """Copy population parameters (including targets) into the individual
    agent, reset its optimizer state, and reset the cloning-weight controller."""
    if agent.nets.actor.layer_sizes != population_nets.actor.layer_sizes:
        raise ShapeError("individual and population networks differ in architecture")
    copy_actor_critic(agent.nets, population_nets)
    reset_controller(agent.controller, agent.initial_beta)
