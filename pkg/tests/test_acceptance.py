"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with `pytest -s tests/test_acceptance.py` to see them live).

The heavy end-to-end criteria (5, 8, 9) sit at the bottom; the whole module
is designed to finish within the stated per-criterion runtime budgets on a
laptop-class CPU.
"""

import time

import numpy as np
import pytest

from comorph.config import make_config, preset_config
from comorph.cpg import (GAIT_PRESETS, CpgParams, GaitAction, cpg_step,
                         initial_state, phase_bias_from_action, simulate_gait,
                         wrap_angle)
from comorph.gp import BoState, GpModel, add_observation, bo_round, gp_fit, gp_posterior
from comorph.harness import BENCH_FUNCTIONS, CodesignRun, run_ablation, run_codesign
from comorph.morphology import from_normalized
from comorph.net import forward, init_mlp
from comorph.offline import PopulationAgent, train_offline
from comorph.online import BetaController, beta_delta, record_return, update_beta
from comorph.replay import ReplayBuffer, Transition
from comorph.td3 import (Td3Params, TwinCritic, bc_actor_loss, critic_loss,
                         make_actor_critic)
from helpers import fd_gradient, grad_arrays, max_rel_err
from test_gp import oracle_posterior


def _report(num, text):
    print(f"\nPASS criterion {num}: {text}")


def test_criterion_01_gradient_correctness():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    for trial in range(20):
        n_hidden = int(rng.integers(1, 3))          # <= 3 weight layers
        widths = [int(rng.integers(3, 13)) for _ in range(n_hidden)]
        obs_dim = int(rng.integers(2, 5))
        act_dim = int(rng.integers(1, 4))
        n = int(rng.integers(2, 5))

        actor = init_mlp([obs_dim, *widths, act_dim], rng, output="tanh")
        q1 = init_mlp([obs_dim + act_dim, *widths, 1], rng)
        q2 = init_mlp([obs_dim + act_dim, *widths, 1], rng)
        critic = TwinCritic(q1, q2, q1, q2)
        batch = {"state": rng.normal(size=(n, obs_dim)),
                 "action": rng.uniform(-1, 1, size=(n, act_dim))}
        x = rng.normal(size=obs_dim)
        gy = rng.normal(size=act_dim)
        targets = rng.normal(size=n)
        weight = float(rng.uniform(0, 1))

        from comorph.net import backward
        analytic, _ = backward(actor, x, gy)
        fd = fd_gradient(lambda: float(forward(actor, x) @ gy), actor)
        assert max_rel_err(grad_arrays(analytic), fd) < 1e-4

        _, g1, g2 = critic_loss(critic, batch, targets)
        for net, g in ((q1, g1), (q2, g2)):
            fd = fd_gradient(lambda: critic_loss(critic, batch, targets)[0], net)
            assert max_rel_err(grad_arrays(g), fd) < 1e-4

        _, ga, _ = bc_actor_loss(actor, critic, batch, weight)
        fd = fd_gradient(lambda: bc_actor_loss(actor, critic, batch, weight)[0], actor)
        assert max_rel_err(grad_arrays(ga), fd) < 1e-4
    elapsed = time.time() - t0
    assert elapsed < 10.0
    _report(1, f"20 nets, forward/critic/actor gradients within 1e-4 of central "
               f"differences ({elapsed:.1f}s)")


def test_criterion_02_gp_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(7)
    for trial in range(100):
        d = int(rng.integers(1, 9))
        n = int(rng.integers(1, 51))
        model = GpModel(np.array([[0.0, 1.0]] * d))
        for _ in range(n):
            add_observation(model, from_normalized(rng.uniform(0, 1, d), model.bounds),
                            float(rng.normal() * rng.uniform(0.5, 5)))
        gp_fit(model)
        for _ in range(5):
            q = from_normalized(rng.uniform(0, 1, d), model.bounds)
            mean, var = gp_posterior(model, q)
            om, ov = oracle_posterior(model.inputs, model.targets, q.normalized(),
                                      model.lengthscales, model.kernel_variance,
                                      model.noise_variance)
            assert mean == pytest.approx(om, abs=1e-8)
            assert var == pytest.approx(ov, abs=1e-8)
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(2, f"posterior matches the dense-solve oracle to 1e-8 on 100 datasets "
               f"({elapsed:.1f}s)")


def test_criterion_03_bo_convergence():
    t0 = time.time()
    bounds, fn, _ = BENCH_FUNCTIONS["quadratic-2d"]
    # brute-force grid oracle for the optimum
    grid = np.linspace(0, 1, 50)
    best_val, best_z = -np.inf, None
    for a in grid:
        for b in grid:
            z = np.array([a, b])
            v = fn(from_normalized(z, bounds))
            if v > best_val:
                best_val, best_z = v, z
    hits = 0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        model = GpModel(bounds)
        state, best, _ = bo_round(BoState(kappa=2.0), model, fn, n_steps=30,
                                  n_probes=30, rng=rng)
        if np.linalg.norm(best.normalized() - best_z) < 0.1:
            hits += 1
    elapsed = time.time() - t0
    assert hits >= 4, f"only {hits}/5 seeds within 0.1 of the grid optimum"
    assert elapsed < 60.0
    _report(3, f"best morphology within 0.1 of the grid optimum on {hits}/5 seeds "
               f"({elapsed:.1f}s)")


def test_criterion_04_beta_controller_arithmetic():
    ctrl = BetaController(kp=3e-5, kd=8e-5, r_target=1000.0, r_last=200.0,
                          r_current=100.0)
    assert beta_delta(ctrl) == -0.019
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        c = BetaController(beta=float(rng.uniform(0, 1)),
                           kp=float(rng.uniform(0, 1e-3)),
                           kd=float(rng.uniform(0, 1e-3)),
                           r_target=float(rng.uniform(-1e4, 1e4)))
        for _ in range(5):
            record_return(c, float(rng.uniform(-1e5, 1e5)))
            update_beta(c)
            assert 0.0 <= c.beta <= 1.0
    _report(4, "delta is exactly -0.019 on the worked example; clamp held over "
               "1e4 random return sequences")


def test_criterion_06_cpg_phase_locking():
    t0 = time.time()
    params = CpgParams()
    # amplitude: critically damped rise from zero, within 1% of 0.4 by 0.4 s
    st = initial_state(params, amp=np.zeros(4))
    a = params.a_r
    for k in range(1, 401):
        st = cpg_step(st, params, 1e-3)
        t = k * 1e-3
        closed = params.amp * (1.0 - (1.0 + a * t) * np.exp(-a * t))
        np.testing.assert_allclose(st.amp, closed, atol=1e-8)
    assert np.all(np.abs(st.amp - 0.4) < 0.004)
    # trot: wrapped pairwise differences within 1e-2 rad of the commanded biases
    _, _, phases = simulate_gait(params, GAIT_PRESETS["trot"], 2.0)
    bias = phase_bias_from_action(GAIT_PRESETS["trot"])
    ph = phases[-1]
    worst = max(abs(float(wrap_angle(ph[j] - ph[i] - bias[i, j])))
                for i in range(4) for j in range(4))
    elapsed = time.time() - t0
    assert worst < 1e-2
    assert elapsed < 5.0
    _report(6, f"trot locks to commanded biases (worst {worst:.2e} rad); amplitude "
               f"follows the critically damped form ({elapsed:.1f}s)")


def test_criterion_07_rk4_order():
    params = CpgParams()
    action = GaitAction(np.array([0.0, 2.0, -1.0, 0.5]))

    def trajectory(dt):
        st = initial_state(params, phase=np.array([0.5, -0.3, 0.1, 0.0]),
                           amp=np.zeros(4))
        p = CpgParams(phase_bias=phase_bias_from_action(action))
        keep = int(round(2e-3 / dt))
        samples = []
        for k in range(1, int(round(1.0 / dt)) + 1):
            st = cpg_step(st, p, dt)
            if k % keep == 0:
                samples.append(np.concatenate([st.phase, st.amp]))
        return np.array(samples)

    ref = trajectory(1.25e-4)
    ratio = (np.max(np.abs(trajectory(2e-3) - ref))
             / np.max(np.abs(trajectory(1e-3) - ref)))
    assert ratio >= 8.0
    _report(7, f"halving dt shrinks 1-s trajectory error {ratio:.1f}x (>= 8x)")


def test_criterion_10_determinism():
    cfg = make_config(seed=9, env="synthetic-fitness", iterations=2,
                      episodes_per_iteration=4, episode_length=12,
                      updates_per_episode=6, warmup_steps=24, batch_size=16,
                      bo_steps=2, bo_probes=3, fitness_samples=16, hidden=(8, 8))
    import tempfile, pathlib
    with tempfile.TemporaryDirectory() as tmp:
        a, b = pathlib.Path(tmp, "a"), pathlib.Path(tmp, "b")
        run_codesign(cfg, out_dir=str(a))
        run_codesign(cfg, out_dir=str(b))
        for name in ("episodes.csv", "iterations.csv", "bo_trace.csv", "manifest.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
    _report(10, "two runs with one seed produced bit-identical log files")


def test_criterion_11_buffer_lifecycle():
    cfg = make_config(seed=13, env="synthetic-fitness", iterations=3,
                      episodes_per_iteration=3, episode_length=10,
                      updates_per_episode=4, warmup_steps=10, batch_size=8,
                      bo_steps=1, bo_probes=2, fitness_samples=8, hidden=(8, 8))
    run = CodesignRun(cfg)
    log = run.run()
    assert run.buffers.d_ind.clear_count == cfg.iterations
    sizes = [r["d_pop_size"] for r in log.episode_rows]
    assert all(b >= a for a, b in zip(sizes, sizes[1:]))
    pushes = [r["d_init_pushes"] for r in log.episode_rows]
    assert pushes == list(range(1, len(log.episode_rows) + 1))
    _report(11, "per-morphology buffer cleared each iteration, pooled buffer "
                "monotone, one start state per episode")


def test_criterion_05_offline_bc_recovery():
    t0 = time.time()
    rng = np.random.default_rng(42)
    state_dim, act_dim, morph_dim = 6, 2, 2
    obs_dim = state_dim + morph_dim
    teacher = init_mlp([obs_dim, 16, act_dim], np.random.default_rng(7),
                       output="tanh", output_scale=0.8)
    morph = np.array([0.4, 0.6])

    observations = np.column_stack([rng.uniform(-1, 1, (10_000, state_dim)),
                                    np.tile(morph, (10_000, 1))])
    actions = forward(teacher, observations)
    held, held_actions = observations[-1000:], actions[-1000:]

    buf = ReplayBuffer(9000, seed=2)
    for obs, a in zip(observations[:9000], actions[:9000]):
        buf.push(Transition(obs, a, float(rng.normal()), obs * 0.99, False, morph))

    agent = PopulationAgent(make_actor_critic(obs_dim, act_dim, (64, 64),
                                              rng=np.random.default_rng(3)),
                            alpha=1000.0)
    train_offline(agent, buf, 5000, Td3Params(batch_size=256), np.random.default_rng(4))
    linf = float(np.max(np.abs(forward(agent.nets.actor, held) - held_actions)))
    elapsed = time.time() - t0
    assert linf < 0.05, f"held-out L_inf {linf:.4f}"
    assert elapsed < 120.0
    _report(5, f"cloning-dominated training reproduces held-out actions to "
               f"L_inf {linf:.3f} < 0.05 ({elapsed:.0f}s)")


def test_criterion_08_codesign_beats_random_sampling():
    t0 = time.time()
    seeds = [11, 22, 33, 44, 55]
    proposed = []
    for s in seeds:
        log = run_codesign(preset_config("desk", seed=s, iterations=10,
                                         episodes_per_iteration=30,
                                         updates_per_episode=60))
        proposed.append((log.iteration_rows[-1]["mean_return"],
                         [r["bo_best_fitness"] for r in log.iteration_rows]))
    randoms = []
    for s in seeds:
        log = run_ablation(preset_config("desk", seed=s, ablation="random_sampling",
                                         iterations=10, episodes_per_iteration=30,
                                         updates_per_episode=60))
        randoms.append(log.iteration_rows[-1]["mean_return"])

    p_mean = float(np.mean([x[0] for x in proposed]))
    r_mean = float(np.mean(randoms))
    assert p_mean > r_mean, f"proposed {p_mean:.2f} vs random {r_mean:.2f}"

    # median seed by final-iteration return; its best-morphology fitness
    # sequence counts an iteration as non-decreasing when it does not fall
    # below its predecessor (the first iteration counts by convention)
    seq = sorted(proposed, key=lambda x: x[0])[len(proposed) // 2][1]
    count = 1 + sum(1 for a, b in zip(seq, seq[1:]) if b >= a)
    elapsed = time.time() - t0
    assert count >= 8, f"best-fitness sequence non-decreasing in only {count}/10"
    assert elapsed < 900.0
    _report(8, f"final-iteration return {p_mean:.1f} (proposed) > {r_mean:.1f} "
               f"(random); median-seed best-fitness non-decreasing {count}/10 "
               f"({elapsed:.0f}s)")


def test_criterion_09_ablation_ordering():
    t0 = time.time()
    schedule = [[1.0] * 6, [1.0, 1.0, 1.0, 1.05, 1.05, 1.05]]
    seeds = [101, 202, 303, 404, 505]
    first, final = {}, {}
    for mode in ("no_copy", "direct_copy", "fixed_term", "adaptive_term"):
        firsts, finals = [], []
        for s in seeds:
            cfg = preset_config("desk", seed=s, ablation=mode, iterations=2,
                                episodes_per_iteration=30,
                                morphology_schedule=schedule)
            log = run_ablation(cfg)
            it2 = [r for r in log.episode_rows
                   if r["iteration"] == 2 and r["phase"] == "train"]
            firsts.append(it2[0]["return"])
            finals.append(it2[-1]["return"])
        first[mode] = float(np.mean(firsts))
        final[mode] = float(np.mean(finals))

    elapsed = time.time() - t0
    for mode in ("direct_copy", "adaptive_term", "fixed_term"):
        assert first[mode] > first["no_copy"], \
            f"{mode} initial {first[mode]:.2f} vs no_copy {first['no_copy']:.2f}"
    assert final["adaptive_term"] >= final["fixed_term"], \
        f"adaptive {final['adaptive_term']:.2f} < fixed {final['fixed_term']:.2f}"
    assert elapsed < 900.0
    _report(9, "initial returns: copies "
               f"{[round(first[m], 1) for m in ('direct_copy', 'adaptive_term', 'fixed_term')]}"
               f" > no_copy {first['no_copy']:.1f}; final adaptive "
               f"{final['adaptive_term']:.1f} >= fixed {final['fixed_term']:.1f} "
               f"({elapsed:.0f}s)")
