"""comorph: bi-level co-design of robot morphology and controller.

A lower-level actor-critic agent trains online under the current morphology;
an offline-trained population agent pools data across morphologies and its
critic supplies the fitness surrogate for GP-UCB morphology search. A coupled
oscillator layer turns per-leg phase actions into joint commands for the
desk-scale environments.
"""

from .config import ExperimentConfig, load_config, make_config, preset_config
from .cpg import CpgParams, CpgState, GaitAction, cpg_output, cpg_step, simulate_gait
from .envs import EnvSpec, PlanarCrawlerEnv, SyntheticFitnessEnv, make_env
from .gp import BoState, GpModel, add_observation, bo_round, gp_fit, gp_posterior, ucb_acquire
from .harness import CodesignRun, RunLog, emit_reports, run_ablation, run_codesign
from .morphology import Morphology, from_normalized, random_morphology
from .net import AdamState, Mlp, adam_step, backward, forward, init_adam, init_mlp, soft_update
from .offline import PopulationAgent, estimate_fitness, surrogate_value, train_offline
from .online import (BetaController, Buffers, ExplorationPolicy, IndividualAgent,
                     rollout_episode, train_epoch, update_beta, warm_start)
from .replay import InitStateStore, ReplayBuffer, Transition
from .td3 import (ActorCritic, SmoothingNoise, Td3Params, TwinCritic, bc_actor_loss,
                  critic_loss, make_actor_critic, td_target)

__version__ = "0.1.0"
