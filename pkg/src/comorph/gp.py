"""Gaussian-process surrogate over morphology space and UCB search.

The GP uses a squared-exponential kernel with ARD lengthscales on inputs
min-max normalized to the unit cube. Targets are standardized to zero mean
and unit variance inside the model and de-standardized on output, which makes
the fixed kernel variance of 1.0 equal to the empirical target variance in
output units, with observation noise a fixed 1e-4 of it. Hyperparameters are
not refit; determinism matters more than marginal likelihood at these sample
sizes.

Acquisition is the upper confidence bound mu + sqrt(kappa) * sigma, maximized
by multi-start coordinate ascent: 1024 uniform seed points, then 50 rounds of
axis-aligned probing from the best 16, projected onto the box. Ties break on
the lowest candidate index, so results are reproducible under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, StateError
from .morphology import Morphology, from_normalized, random_morphology

JITTER_START = 1e-10
JITTER_MAX = 1e-4


@dataclass
class GpModel:
    bounds: np.ndarray                      # (d, 2) morphology box
    inputs: np.ndarray = None               # (n, d) normalized to the unit cube
    targets: np.ndarray = None              # (n,)
    lengthscales: np.ndarray | float = 0.2
    kernel_variance: float = 1.0
    noise_variance: float = 1e-4
    standardize: bool = True
    # fitted state
    chol: np.ndarray = field(default=None, repr=False)
    alpha: np.ndarray = field(default=None, repr=False)
    t_mean: float = 0.0
    t_std: float = 1.0
    jitter_used: float = 0.0

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=np.float64)
        d = self.bounds.shape[0]
        if self.inputs is None:
            self.inputs = np.empty((0, d))
        if self.targets is None:
            self.targets = np.empty(0)
        self.lengthscales = np.broadcast_to(
            np.asarray(self.lengthscales, dtype=np.float64), (d,)).copy()

    @property
    def n_obs(self) -> int:
        return self.inputs.shape[0]


def add_observation(model: GpModel, morphology: Morphology, target: float) -> None:
    """Append one (morphology, fitness) pair; invalidates the cached factor."""
    if not np.isfinite(target):
        raise NumericError("non-finite fitness observation")
    z = morphology.normalized()
    model.inputs = np.vstack([model.inputs, z[None, :]])
    model.targets = np.append(model.targets, float(target))
    model.chol = None
    model.alpha = None


def _kernel(model: GpModel, a, b) -> np.ndarray:
    diff = (a[:, None, :] - b[None, :, :]) / model.lengthscales
    return model.kernel_variance * np.exp(-0.5 * np.sum(diff * diff, axis=2))


def gp_fit(model: GpModel) -> GpModel:
    """Cache the Cholesky factor of K + noise*I, escalating jitter on failure."""
    n = model.n_obs
    if n == 0:
        raise StateError("gp_fit requires at least one observation")
    if model.standardize:
        model.t_mean = float(np.mean(model.targets))
        std = float(np.std(model.targets))
        model.t_std = std if std > 1e-12 else 1.0
    else:
        model.t_mean, model.t_std = 0.0, 1.0
    y = (model.targets - model.t_mean) / model.t_std
    k = _kernel(model, model.inputs, model.inputs)
    k[np.diag_indices(n)] += model.noise_variance
    jitter = 0.0
    while True:
        try:
            model.chol = np.linalg.cholesky(k + jitter * np.eye(n))
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX:
                diag = np.diag(k)
                raise NumericError(
                    f"Cholesky failed at jitter {JITTER_MAX:g}: n={n}, "
                    f"diag range [{diag.min():g}, {diag.max():g}]")
    model.jitter_used = jitter
    model.alpha = np.linalg.solve(model.chol.T, np.linalg.solve(model.chol, y))
    return model


def _posterior_many(model: GpModel, z) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and variance at normalized query rows, de-standardized."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if model.n_obs == 0:
        mean = np.zeros(z.shape[0])
        var = np.full(z.shape[0], model.kernel_variance)
    else:
        if model.chol is None:
            raise StateError("model not fitted; call gp_fit first")
        ks = _kernel(model, model.inputs, z)
        mean = ks.T @ model.alpha
        v = np.linalg.solve(model.chol, ks)
        var = np.maximum(model.kernel_variance - np.sum(v * v, axis=0), 0.0)
    return mean * model.t_std + model.t_mean, var * model.t_std ** 2


def gp_posterior(model: GpModel, query: Morphology) -> tuple[float, float]:
    mean, var = _posterior_many(model, query.normalized()[None, :])
    return float(mean[0]), float(var[0])


def ucb_acquire(model: GpModel, kappa: float, rng, n_seeds=1024, n_rounds=50,
                n_top=16) -> Morphology:
    """Maximize mu + sqrt(kappa) * sigma over the box; always in bounds."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    d = model.bounds.shape[0]
    root_k = np.sqrt(kappa)

    def acq(z):
        mean, var = _posterior_many(model, z)
        return mean + root_k * np.sqrt(var)

    seeds = rng.uniform(0.0, 1.0, size=(n_seeds, d))
    scores = acq(seeds)
    order = np.argsort(-scores, kind="stable")[:n_top]
    cand = seeds[order].copy()
    best = scores[order].copy()

    step = 0.25
    for _ in range(n_rounds):
        # all +/- axis moves for every candidate, evaluated in one batch
        moves = np.repeat(cand, 2 * d, axis=0)
        offsets = np.concatenate([np.eye(d), -np.eye(d)]) * step
        moves += np.tile(offsets, (cand.shape[0], 1))
        np.clip(moves, 0.0, 1.0, out=moves)
        vals = acq(moves).reshape(cand.shape[0], 2 * d)
        pick = np.argmax(vals, axis=1)
        pick_vals = vals[np.arange(cand.shape[0]), pick]
        improved = pick_vals > best
        if np.any(improved):
            rows = np.where(improved)[0]
            cand[rows] = moves.reshape(cand.shape[0], 2 * d, d)[rows, pick[rows]]
            best[rows] = pick_vals[rows]
        else:
            step *= 0.5
    return from_normalized(cand[int(np.argmax(best))], model.bounds)


# ---------------------------------------------------------------------------
# BO rounds
# ---------------------------------------------------------------------------

@dataclass
class BoState:
    observations: list = field(default_factory=list)   # (Morphology, fitness)
    kappa: float = 2.0
    step: int = 0
    seed_count: int = 0


def bo_round(state: BoState, model: GpModel, evaluator, n_steps=30, n_probes=30,
             rng=None):
    """Run one acquisition round: random probes, then n_steps UCB cycles.

    evaluator maps a Morphology to a scalar fitness. Observations are only
    recorded after a successful evaluation, so an evaluator fault leaves the
    state consistent up to the last completed step. Returns
    (state, best_morphology, trace) where trace rows are dicts suitable for
    CSV emission.
    """
    trace = []

    def record(kind, xi, fit, mean, var):
        fits = [f for _, f in state.observations]
        trace.append({"kind": kind, "values": xi.values.copy(), "fitness": fit,
                      "post_mean": mean, "post_var": var,
                      "running_best": max(fits) if fits else fit})

    for _ in range(n_probes):
        xi = random_morphology(model.bounds, rng)
        fit = float(evaluator(xi))
        add_observation(model, xi, fit)
        state.observations.append((xi, fit))
        state.seed_count += 1
        record("probe", xi, fit, np.nan, np.nan)

    for _ in range(n_steps):
        if model.n_obs > 0:
            gp_fit(model)
        xi = ucb_acquire(model, state.kappa, rng)
        mean, var = gp_posterior(model, xi) if model.n_obs else (0.0, model.kernel_variance)
        fit = float(evaluator(xi))
        add_observation(model, xi, fit)
        state.observations.append((xi, fit))
        state.step += 1
        record("ucb", xi, fit, mean, var)

    if not state.observations:
        raise StateError("bo_round produced no observations (0 probes and 0 steps)")
    fits = np.array([f for _, f in state.observations])
    best = state.observations[int(np.argmax(fits))][0]
    return state, best, trace
