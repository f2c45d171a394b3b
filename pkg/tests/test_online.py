import numpy as np
import pytest

from comorph.envs import EnvSpec
from comorph.morphology import Morphology
from comorph.net import forward
from comorph.online import (BetaController, Buffers, ExplorationPolicy,
                            IndividualAgent, beta_delta, greedy_action,
                            record_return, reset_controller, rollout_episode,
                            train_epoch, update_beta, warm_start)
from comorph.replay import InitStateStore, ReplayBuffer, Transition
from comorph.td3 import Td3Params, make_actor_critic, q_value


class FakeEnv:
    """Deterministic stub: fixed reward per step, state is a step counter."""

    def __init__(self, episode_length=10, reward=1.0, state_dim=3, action_dim=2):
        self.spec = EnvSpec(name="fake", state_dim=state_dim, action_dim=action_dim,
                            morphology_dim=2, morphology_bounds=[[0, 1], [0, 1]],
                            episode_length=episode_length)
        self.reward = reward
        self._t = 0

    def reset(self, morphology, seed):
        self.morphology = morphology
        self._t = 0
        rng = np.random.default_rng(seed)
        self._core = rng.uniform(-0.5, 0.5, self.spec.state_dim)
        return np.concatenate([self._core, morphology.values])

    def step(self, action):
        self._t += 1
        self._core = self._core + 0.01
        done = self._t >= self.spec.episode_length
        return (np.concatenate([self._core, self.morphology.values]),
                self.reward, done, {})


def fake_buffers(cap=1000):
    return Buffers(ReplayBuffer(cap, seed=1), ReplayBuffer(cap, seed=2),
                   InitStateStore(cap))


def fake_morph():
    return Morphology(np.array([0.4, 0.6]), np.array([[0, 1], [0, 1]]))


def make_agent(rng, obs_dim=5, action_dim=2, hidden=(8, 8)):
    nets = make_actor_critic(obs_dim, action_dim, hidden, rng=rng)
    return IndividualAgent(nets, BetaController(r_target=100.0),
                           ExplorationPolicy(0.1), initial_beta=0.4)


# -- cloning-weight controller ------------------------------------------------

def test_beta_delta_hand_value():
    ctrl = BetaController(kp=3e-5, kd=8e-5, r_target=1000.0, r_last=200.0,
                          r_current=100.0)
    assert beta_delta(ctrl) == -0.019


def test_beta_unchanged_when_on_target_and_not_dropping():
    ctrl = BetaController(beta=0.4, r_target=500.0, r_last=400.0, r_current=500.0)
    update_beta(ctrl)
    assert ctrl.beta == 0.4


def test_beta_rises_above_target():
    ctrl = BetaController(beta=0.4, r_target=100.0, r_last=150.0, r_current=200.0)
    update_beta(ctrl)
    assert ctrl.beta > 0.4


def test_beta_clamped_over_random_sequences():
    rng = np.random.default_rng(0)
    for _ in range(200):
        ctrl = BetaController(beta=float(rng.uniform(0, 1)),
                              r_target=float(rng.uniform(-500, 500)))
        for _ in range(50):
            record_return(ctrl, float(rng.uniform(-1e4, 1e4)))
            update_beta(ctrl)
            assert 0.0 <= ctrl.beta <= 1.0


def test_beta_monotone_below_target():
    ctrl = BetaController(beta=0.8, r_target=1000.0)
    betas = []
    ret = 500.0
    for _ in range(30):
        record_return(ctrl, ret)
        update_beta(ctrl)
        betas.append(ctrl.beta)
        ret -= 10.0                      # non-increasing returns below target
    assert all(b2 <= b1 for b1, b2 in zip(betas, betas[1:]))


# -- rollouts -------------------------------------------------------------------

def test_rollout_zero_reward_env():
    rng = np.random.default_rng(1)
    env = FakeEnv(episode_length=8, reward=0.0)
    agent = make_agent(rng)
    buffers = fake_buffers()
    ret = rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore,
                          buffers, rng)
    assert ret == 0.0


def test_rollout_unit_reward_return_is_episode_length():
    rng = np.random.default_rng(2)
    env = FakeEnv(episode_length=1000, reward=1.0)
    agent = make_agent(rng)
    ret = rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore,
                          fake_buffers(2000), rng)
    assert ret == 1000.0


def test_rollout_buffer_bookkeeping():
    rng = np.random.default_rng(3)
    env = FakeEnv(episode_length=12)
    agent = make_agent(rng)
    buffers = fake_buffers()
    for k in range(3):
        ret = rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore,
                              buffers, rng)
        assert len(buffers.d_ind) == 12 * (k + 1)
        assert len(buffers.d_pop) == 12 * (k + 1)
        assert len(buffers.d_init) == k + 1
    # episodic return equals the sum of rewards stored for the episode
    rewards = [t.reward for t in buffers.d_ind.snapshot()][-12:]
    assert ret == pytest.approx(sum(rewards))


def test_rollout_stores_core_initial_state():
    rng = np.random.default_rng(4)
    env = FakeEnv(episode_length=5)
    agent = make_agent(rng)
    buffers = fake_buffers()
    rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore, buffers, rng)
    s0 = buffers.d_init.all_states()[0]
    assert s0.size == env.spec.state_dim      # morphology tail stripped


def test_rollout_uniform_random_actions_within_bounds():
    rng = np.random.default_rng(5)
    env = FakeEnv(episode_length=20)
    agent = make_agent(rng)
    buffers = fake_buffers()
    rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore, buffers, rng,
                    uniform_random=True)
    acts = np.array([t.action for t in buffers.d_ind.snapshot()])
    assert np.all(np.abs(acts) <= 1.0)
    assert np.std(acts) > 0.3                 # actually random, not policy output


# -- training cadence -----------------------------------------------------------

def filled_buffers(rng, env, agent, episodes=3):
    buffers = fake_buffers()
    for _ in range(episodes):
        rollout_episode(env, agent.nets.actor, fake_morph(), agent.explore,
                        buffers, rng)
    return buffers


def test_train_epoch_zero_updates_is_noop():
    rng = np.random.default_rng(6)
    env = FakeEnv()
    agent = make_agent(rng)
    buffers = filled_buffers(rng, env, agent)
    before = [w.copy() for w in agent.nets.actor.weights]
    out = train_epoch(agent, buffers, 0, Td3Params(batch_size=8), rng)
    assert out["updates"] == 0
    assert all(np.array_equal(a, b) for a, b in zip(before, agent.nets.actor.weights))


def test_train_epoch_actor_step_cadence():
    rng = np.random.default_rng(7)
    env = FakeEnv()
    agent = make_agent(rng)
    buffers = filled_buffers(rng, env, agent)
    params = Td3Params(batch_size=8, policy_update_frequency=2)
    train_epoch(agent, buffers, 10, params, rng)
    assert agent.nets.adam_actor.step_count == 5
    assert agent.nets.adam_q1.step_count == 10


def test_train_epoch_skips_when_underfilled():
    rng = np.random.default_rng(8)
    agent = make_agent(rng)
    buffers = fake_buffers()
    out = train_epoch(agent, buffers, 5, Td3Params(batch_size=64), rng)
    assert out["updates"] == 0


def test_single_transition_overfit_gamma_zero():
    # Bellman fixed point at gamma 0: critic regresses to the reward
    rng = np.random.default_rng(9)
    agent = make_agent(rng, obs_dim=5, action_dim=2, hidden=(16, 16))
    buffers = fake_buffers()
    s = np.array([0.1, -0.2, 0.3, 0.4, 0.6])
    a = np.array([0.5, -0.5])
    t = Transition(s, a, 0.7, s + 0.01, False, np.array([0.4, 0.6]))
    for _ in range(8):
        buffers.d_ind.push(t)
    params = Td3Params(gamma=0.0, batch_size=8)
    train_epoch(agent, buffers, 2000, params, rng)
    q = q_value(agent.nets.critic.q1, s[None, :], a[None, :])[0]
    assert abs(q - 0.7) < 1e-2


# -- warm starts ------------------------------------------------------------------

def test_warm_start_copies_population_policy():
    rng = np.random.default_rng(10)
    agent = make_agent(rng)
    pop_nets = make_actor_critic(5, 2, (8, 8), rng=rng)
    agent.controller.beta = 0.9
    agent.nets.adam_actor.step_count = 50
    warm_start(agent, pop_nets)
    probe = rng.normal(size=(6, 5))
    assert np.array_equal(forward(agent.nets.actor, probe), forward(pop_nets.actor, probe))
    assert agent.nets.adam_actor.step_count == 0
    assert agent.controller.beta == agent.initial_beta


def test_warm_start_idempotent():
    rng = np.random.default_rng(11)
    agent = make_agent(rng)
    pop_nets = make_actor_critic(5, 2, (8, 8), rng=rng)
    warm_start(agent, pop_nets)
    snap = [w.copy() for w in agent.nets.actor.weights]
    warm_start(agent, pop_nets)
    assert all(np.array_equal(a, b) for a, b in zip(snap, agent.nets.actor.weights))


def test_warm_started_greedy_trace_matches_population():
    rng = np.random.default_rng(12)
    agent = make_agent(rng)
    pop_nets = make_actor_critic(5, 2, (8, 8), rng=rng)
    warm_start(agent, pop_nets)
    env1, env2 = FakeEnv(episode_length=15), FakeEnv(episode_length=15)
    m = fake_morph()
    obs1, obs2 = env1.reset(m, seed=77), env2.reset(m, seed=77)
    done = False
    while not done:
        a1 = greedy_action(agent.nets.actor, obs1)
        a2 = greedy_action(pop_nets.actor, obs2)
        assert np.array_equal(a1, a2)
        obs1, _, done, _ = env1.step(a1)
        obs2, _, _, _ = env2.step(a2)
