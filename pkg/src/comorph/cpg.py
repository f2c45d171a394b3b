"""Central pattern generator: coupled phase oscillators for gait commands.

Four oscillators (one per leg: left-front, right-front, left-rear, right-rear)
evolve under

    phase_i'  = 2*pi*f_i + sum_j mu_ij * (phase_j - phase_i - bias_ij)
    r_i''     = a_r^2 * (R_i - r_i) - 2*a_r*r_i'
    x_i''     = a_x^2 * (X_i - x_i) - 2*a_x*x_i'

with the joint position command theta_i = x_i + r_i*cos(phase_i). The
amplitude and offset dynamics are critically damped second-order filters, so
from rest they approach their setpoints as 1 - (1 + a*t)*exp(-a*t).

The gait is selected through the desired phase biases bias_ij, parameterized
by one phase per leg: bias_ij = phi_j - phi_i, which makes the bias matrix
skew-symmetric by construction. The coupling term uses the raw (unwrapped)
phase difference by default; set wrapped_coupling for the principal-value
variant on long horizons.

Integration is fixed-step RK4. The gains (20) and coupling (20) make the
system moderately stiff; dt must stay at or below 2e-3 s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

DT_MAX = 2e-3


def wrap_angle(x):
    """Map angles to [-pi, pi)."""
    return np.mod(np.asarray(x) + np.pi, 2.0 * np.pi) - np.pi


@dataclass
class CpgParams:
    n_osc: int = 4
    freq: np.ndarray = None          # Hz per oscillator
    amp: np.ndarray = None           # setpoint R_i, rad
    offset: np.ndarray = None        # setpoint X_i, rad
    a_r: float = 20.0
    a_x: float = 20.0
    coupling: np.ndarray = None      # mu, zero diagonal
    phase_bias: np.ndarray = None    # skew-symmetric bias matrix
    wrapped_coupling: bool = False

    def __post_init__(self):
        n = self.n_osc
        self.freq = np.full(n, 10.0) if self.freq is None else np.asarray(self.freq, float)
        self.amp = np.full(n, 0.4) if self.amp is None else np.asarray(self.amp, float)
        self.offset = np.full(n, 0.04) if self.offset is None else np.asarray(self.offset, float)
        if self.coupling is None:
            self.coupling = np.full((n, n), 20.0)
            np.fill_diagonal(self.coupling, 0.0)
        else:
            self.coupling = np.asarray(self.coupling, float)
        if self.phase_bias is None:
            self.phase_bias = np.zeros((n, n))
        else:
            self.phase_bias = np.asarray(self.phase_bias, float)
        if np.any(np.diag(self.coupling) != 0.0):
            raise ValueError("oscillators must not couple to themselves")
        if not np.allclose(self.phase_bias, -self.phase_bias.T, atol=1e-12):
            raise ValueError("phase bias matrix must be skew-symmetric")


@dataclass
class CpgState:
    phase: np.ndarray
    amp: np.ndarray
    amp_rate: np.ndarray
    offset: np.ndarray
    offset_rate: np.ndarray

    def wrapped_phase(self) -> np.ndarray:
        return wrap_angle(self.phase)


@dataclass
class GaitAction:
    """Per-leg phases (rad, in [-pi, pi]) from which pairwise biases derive."""
    phi: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if np.any(np.abs(self.phi) > np.pi + 1e-12):
            raise ValueError("gait phases must lie in [-pi, pi]")


GAIT_PRESETS = {
    "pronk": GaitAction(np.array([0.0, 0.0, 0.0, 0.0])),
    "trot": GaitAction(np.array([0.0, np.pi, np.pi, 0.0])),
    "pace": GaitAction(np.array([0.0, np.pi, 0.0, np.pi])),
    "walk": GaitAction(np.array([0.0, np.pi, 0.5 * np.pi, -0.5 * np.pi])),
}


def phase_bias_from_action(action: GaitAction) -> np.ndarray:
    """bias[i, j] = phi_j - phi_i; skew-symmetric by construction."""
    return action.phi[None, :] - action.phi[:, None]


def initial_state(params: CpgParams, phase=None, amp=None) -> CpgState:
    n = params.n_osc
    return CpgState(
        phase=np.zeros(n) if phase is None else np.asarray(phase, float).copy(),
        amp=params.amp.copy() if amp is None else np.asarray(amp, float).copy(),
        amp_rate=np.zeros(n),
        offset=params.offset.copy(),
        offset_rate=np.zeros(n),
    )


def _derivative(y, params: CpgParams):
    n = params.n_osc
    phase, r, dr, x, dx = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:4 * n], y[4 * n:]
    diff = phase[None, :] - phase[:, None] - params.phase_bias
    if params.wrapped_coupling:
        diff = wrap_angle(diff)
    dphase = 2.0 * np.pi * params.freq + np.sum(params.coupling * diff, axis=1)
    ddr = params.a_r ** 2 * (params.amp - r) - 2.0 * params.a_r * dr
    ddx = params.a_x ** 2 * (params.offset - x) - 2.0 * params.a_x * dx
    return np.concatenate([dphase, dr, ddr, dx, ddx])


def cpg_step(state: CpgState, params: CpgParams, dt: float) -> CpgState:
    """Advance the oscillator network one RK4 step."""
    if not 0.0 < dt <= DT_MAX:
        raise ValueError(f"dt must be in (0, {DT_MAX}], got {dt}")
    y = np.concatenate([state.phase, state.amp, state.amp_rate,
                        state.offset, state.offset_rate])
    if not np.all(np.isfinite(y)):
        raise NumericError("non-finite oscillator state")
    k1 = _derivative(y, params)
    k2 = _derivative(y + 0.5 * dt * k1, params)
    k3 = _derivative(y + 0.5 * dt * k2, params)
    k4 = _derivative(y + dt * k3, params)
    y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    n = params.n_osc
    return CpgState(y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:4 * n], y[4 * n:])


def cpg_output(state: CpgState) -> np.ndarray:
    """Joint position commands theta_i = x_i + r_i*cos(phase_i)."""
    return state.offset + state.amp * np.cos(state.phase)


def simulate_gait(params: CpgParams, action: GaitAction, duration: float, dt: float = 1e-3,
                  state: CpgState = None):
    """Integrate under a fixed gait action; returns (times, commands, wrapped phases).

    The commanded pairwise phase differences are reached after the coupling
    transient; give the run at least ~1 s to settle.
    """
    p = CpgParams(params.n_osc, params.freq, params.amp, params.offset, params.a_r,
                  params.a_x, params.coupling, phase_bias_from_action(action),
                  params.wrapped_coupling)
    st = initial_state(p) if state is None else state
    steps = int(round(duration / dt))
    times = np.arange(steps + 1) * dt
    outputs = np.empty((steps + 1, p.n_osc))
    phases = np.empty((steps + 1, p.n_osc))
    outputs[0] = cpg_output(st)
    phases[0] = st.wrapped_phase()
    for k in range(steps):
        st = cpg_step(st, p, dt)
        outputs[k + 1] = cpg_output(st)
        phases[k + 1] = st.wrapped_phase()
    return times, outputs, phases
