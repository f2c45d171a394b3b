"""Population-network trainer: TD3 with a fixed behavior-cloning weight,
trained purely from the pooled replay buffer.

The population agent never touches an environment; it has no handle to one.
Its critic doubles as the morphology-fitness surrogate: the value of the
policy at an episode start state, with the candidate morphology appended to
the observation, estimates the episodic return that morphology would earn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError
from .morphology import Morphology
from .net import forward
from .replay import InitStateStore, ReplayBuffer
from .td3 import ActorCritic, Td3Params, q_value, train_step


@dataclass
class PopulationAgent:
    nets: ActorCritic
    alpha: float = 0.4


def train_offline(agent: PopulationAgent, d_pop: ReplayBuffer, n_updates: int,
                  params: Td3Params, rng) -> dict:
    """n_updates TD3 iterations on d_pop batches with the fixed weight alpha.

    Unlike the online loop, an undersized dataset is an error: there is no
    environment to go collect more."""
    if len(d_pop) < params.batch_size:
        raise StateError(f"offline training needs >= {params.batch_size} transitions, "
                         f"buffer holds {len(d_pop)}")
    c_losses, a_losses, bc_terms, bc_weighted = [], [], [], []
    for i in range(n_updates):
        batch = d_pop.sample_arrays(params.batch_size)
        do_actor = (i + 1) % params.policy_update_frequency == 0
        diag = train_step(agent.nets, batch, params.gamma, params.noise, rng,
                          agent.alpha, params.tau, do_actor)
        c_losses.append(diag["critic_loss"])
        if do_actor:
            a_losses.append(diag["actor_loss"])
            bc_terms.append(diag["bc_term"])
            bc_weighted.append(diag["bc_weighted"])
    return {
        "updates": n_updates,
        "critic_loss": float(np.mean(c_losses)) if c_losses else np.nan,
        "actor_loss": float(np.mean(a_losses)) if a_losses else np.nan,
        "bc_term": float(np.mean(bc_terms)) if bc_terms else np.nan,
        "bc_weighted": float(np.mean(bc_weighted)) if bc_weighted else np.nan,
    }


def surrogate_value(agent: PopulationAgent, s0_core, morphology: Morphology) -> float:
    """Critic estimate of episodic value for one start state and morphology:
    Q1 at (s0 + morphology, policy(s0 + morphology))."""
    obs = np.concatenate([np.asarray(s0_core, dtype=np.float64), morphology.values])
    action = forward(agent.nets.actor, obs)
    return float(q_value(agent.nets.critic.q1, obs[None, :], action[None, :])[0])


def estimate_fitness(agent: PopulationAgent, d_init: InitStateStore,
                     morphology: Morphology, rng, n_samples=64):
    """Monte-Carlo fitness: mean surrogate value over start states drawn from
    the initial-state store. Returns (mean, standard error)."""
    states = d_init.sample(n_samples, rng)
    obs = np.concatenate([states, np.tile(morphology.values, (states.shape[0], 1))], axis=1)
    actions = forward(agent.nets.actor, obs)
    values = q_value(agent.nets.critic.q1, obs, actions)
    stderr = float(np.std(values) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return float(np.mean(values)), stderr
