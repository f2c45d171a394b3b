"""Twin-critic machinery shared by the online and offline trainers.

Batch convention: a batch is a dict of stacked float64 arrays with keys
state, action, reward, next_state, done, where "state" is the full
observation (core env state with the morphology vector appended). Critics
take [observation, action]; actors take the observation.

Loss reduction conventions, pinned so hand examples are bit-checkable:

* critic regression: L = 1/2 * mean over batch AND over the two critics of
  (y - Q_c(s, a))^2. A single sample with y = 2 and both critics at 0 gives
  L = 2. Gradients flow only into q1/q2; targets are constants.
* actor objective: L = -mean_i[ Q1(s_i, pi(s_i)) ] / D
  + weight * mean_i[ sum_dims (pi(s_i) - a_i)^2 ], where the normalizer
  D = mean_i |Q1(s_i, a_i)| is computed on the dataset actions of the same
  batch and treated as a constant (no gradient through it), clamped to 1e-8.

The bootstrap target uses the clipped double-Q minimum over smoothed target
actions; the actor objective uses Q1 only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .net import (AdamState, Mlp, adam_step, backward, clone_mlp, copy_params,
                  forward, init_adam, init_mlp, soft_update)

DENOM_FLOOR = 1e-8


@dataclass
class TwinCritic:
    q1: Mlp
    q2: Mlp
    q1_target: Mlp
    q2_target: Mlp


@dataclass
class SmoothingNoise:
    sigma: float = 0.2
    clip: float = 0.5

    def __post_init__(self):
        if self.sigma <= 0 or self.clip <= 0:
            raise ValueError("sigma and clip must be positive")


@dataclass
class Td3Params:
    """Knobs shared by the online and offline update loops."""
    gamma: float = 0.99
    tau: float = 5e-3
    batch_size: int = 256
    policy_update_frequency: int = 1
    noise: SmoothingNoise = None

    def __post_init__(self):
        if self.noise is None:
            self.noise = SmoothingNoise()


def make_twin_critic(obs_dim, action_dim, hidden=(64, 64), rng=None) -> TwinCritic:
    sizes = [obs_dim + action_dim, *hidden, 1]
    q1 = init_mlp(sizes, rng)
    q2 = init_mlp(sizes, rng)
    return TwinCritic(q1, q2, clone_mlp(q1), clone_mlp(q2))


def q_value(net: Mlp, obs, action) -> np.ndarray:
    """Scalar critic output per row of [obs, action]."""
    x = np.concatenate([np.atleast_2d(obs), np.atleast_2d(action)], axis=1)
    return forward(net, x)[:, 0]


def td_target(critic: TwinCritic, actor_target: Mlp, batch, gamma, noise: SmoothingNoise,
              rng) -> np.ndarray:
    """Per-sample bootstrap target y = r + gamma * (1 - done) * min(Q1bar, Q2bar)
    at the smoothed, clipped target action."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    s2 = batch["next_state"]
    if s2.shape[0] == 0:
        raise ShapeError("empty batch")
    a2 = forward(actor_target, s2)
    eps = np.clip(rng.normal(0.0, noise.sigma, size=a2.shape), -noise.clip, noise.clip)
    a2 = np.clip(a2 + eps, -actor_target.output_scale, actor_target.output_scale)
    q = np.minimum(q_value(critic.q1_target, s2, a2), q_value(critic.q2_target, s2, a2))
    return batch["reward"] + gamma * (1.0 - batch["done"]) * q


def critic_loss(critic: TwinCritic, batch, targets):
    """Returns (loss, grads_q1, grads_q2) under the documented reduction."""
    s, a = batch["state"], batch["action"]
    y = np.asarray(targets, dtype=np.float64)
    n = s.shape[0]
    if y.shape != (n,):
        raise ShapeError(f"targets shape {y.shape} != batch size ({n},)")
    x = np.concatenate([s, a], axis=1)
    loss = 0.0
    grads = []
    for net in (critic.q1, critic.q2):
        q = forward(net, x)[:, 0]
        resid = q - y
        loss += 0.5 * np.mean(resid ** 2) / 2.0
        g, _ = backward(net, x, (resid / (2.0 * n))[:, None])
        grads.append(g)
    return loss, grads[0], grads[1]


def bc_actor_loss(actor: Mlp, critic: TwinCritic, batch, weight):
    """Returns (loss, actor_grads, diagnostics) for the normalized-Q objective
    with a squared behavior-cloning penalty of the given weight."""
    if weight < 0:
        raise ValueError("behavior-cloning weight must be >= 0")
    s, a_data = batch["state"], batch["action"]
    n = s.shape[0]
    if n == 0:
        raise ShapeError("empty batch")
    pi = forward(actor, s)

    q_data = q_value(critic.q1, s, a_data)
    denom = float(np.mean(np.abs(q_data)))
    clamped = denom < DENOM_FLOOR
    if clamped:
        denom = DENOM_FLOOR

    x_pi = np.concatenate([s, pi], axis=1)
    q_pi = forward(critic.q1, x_pi)[:, 0]
    diff = pi - a_data
    bc_term = float(np.mean(np.sum(diff ** 2, axis=1)))
    loss = -float(np.mean(q_pi)) / denom + weight * bc_term

    # dL/dpi: critic input-gradient (action slice) plus the cloning pull.
    _, gx = backward(critic.q1, x_pi, np.full((n, 1), -1.0 / (n * denom)))
    gy_pi = gx[:, s.shape[1]:] + (2.0 * weight / n) * diff
    actor_grads, _ = backward(actor, s, gy_pi)

    diag = {"bc_term": bc_term, "q_norm": float(np.mean(q_pi)) / denom,
            "denom": denom, "denom_clamped": clamped}
    return loss, actor_grads, diag


# ---------------------------------------------------------------------------
# Actor-critic bundle and the update steps both trainers share
# ---------------------------------------------------------------------------

@dataclass
class ActorCritic:
    actor: Mlp
    actor_target: Mlp
    critic: TwinCritic
    adam_actor: AdamState
    adam_q1: AdamState
    adam_q2: AdamState


def make_actor_critic(obs_dim, action_dim, hidden=(64, 64), learning_rate=3e-4,
                      rng=None) -> ActorCritic:
    actor = init_mlp([obs_dim, *hidden, action_dim], rng, output="tanh", output_scale=1.0)
    critic = make_twin_critic(obs_dim, action_dim, hidden, rng)
    return ActorCritic(
        actor, clone_mlp(actor), critic,
        init_adam(actor, learning_rate),
        init_adam(critic.q1, learning_rate),
        init_adam(critic.q2, learning_rate),
    )


def copy_actor_critic(dst: ActorCritic, src: ActorCritic, learning_rate=None) -> None:
    """Copy every network (including targets) from src into dst and reset
    dst's optimizer state."""
    copy_params(dst.actor, src.actor)
    copy_params(dst.actor_target, src.actor_target)
    copy_params(dst.critic.q1, src.critic.q1)
    copy_params(dst.critic.q2, src.critic.q2)
    copy_params(dst.critic.q1_target, src.critic.q1_target)
    copy_params(dst.critic.q2_target, src.critic.q2_target)
    lr = dst.adam_actor.learning_rate if learning_rate is None else learning_rate
    dst.adam_actor = init_adam(dst.actor, lr)
    dst.adam_q1 = init_adam(dst.critic.q1, lr)
    dst.adam_q2 = init_adam(dst.critic.q2, lr)


def train_step(ac: ActorCritic, batch, gamma, noise: SmoothingNoise, rng,
               bc_weight, tau, do_actor=True):
    """One critic regression step, optionally followed by an actor step and
    Polyak target updates (the standard delayed-actor cadence)."""
    y = td_target(ac.critic, ac.actor_target, batch, gamma, noise, rng)
    c_loss, g1, g2 = critic_loss(ac.critic, batch, y)
    adam_step(ac.critic.q1, g1, ac.adam_q1)
    adam_step(ac.critic.q2, g2, ac.adam_q2)
    diag = {"critic_loss": c_loss, "actor_loss": np.nan, "bc_term": np.nan,
            "bc_weighted": np.nan}
    if do_actor:
        a_loss, ga, a_diag = bc_actor_loss(ac.actor, ac.critic, batch, bc_weight)
        adam_step(ac.actor, ga, ac.adam_actor)
        soft_update(ac.actor_target, ac.actor, tau)
        soft_update(ac.critic.q1_target, ac.critic.q1, tau)
        soft_update(ac.critic.q2_target, ac.critic.q2, tau)
        diag["actor_loss"] = a_loss
        diag["bc_term"] = a_diag["bc_term"]
        diag["bc_weighted"] = bc_weight * a_diag["bc_term"]
    return diag
