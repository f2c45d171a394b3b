"""Minimal dense-network engine on numpy.

Everything here is float64 and deliberately small: fully-connected layers with
ReLU hidden activations, a linear or tanh-scaled output head, reverse-mode
gradients written out by hand, bias-corrected Adam, and Polyak averaging for
target networks. Weight layout is (fan_out, fan_in) per layer, so a forward
pass is ``h = relu(W h + b)`` down the stack.

`backward` returns the gradient of ``sum(output * output_grad)`` with respect
to every parameter and to the input; for batched inputs the parameter
gradients are summed over the batch, so callers encode any 1/N reduction in
``output_grad`` itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError

CHECKPOINT_VERSION = 1


@dataclass
class Mlp:
    """Parameters of one feed-forward network.

    output: "linear" for critics, "tanh" for actors. A tanh head is scaled by
    output_scale so actions land in [-output_scale, output_scale].
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output: str = "linear"
    output_scale: float = 1.0


@dataclass
class MlpGrads:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class AdamState:
    m_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_weights: list[np.ndarray]
    v_biases: list[np.ndarray]
    step_count: int = 0
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_mlp(layer_sizes, rng, output="linear", output_scale=1.0) -> Mlp:
    """Build a network with uniform fan-in scaled weights, U(-1/sqrt(n), 1/sqrt(n))."""
    if len(layer_sizes) < 2 or any(n <= 0 for n in layer_sizes):
        raise ShapeError(f"need >= 2 positive layer sizes, got {layer_sizes}")
    if output not in ("linear", "tanh"):
        raise ValueError(f"unknown output head {output!r}")
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return Mlp(list(layer_sizes), weights, biases, output, float(output_scale))


def zeros_like_grads(net: Mlp) -> MlpGrads:
    return MlpGrads([np.zeros_like(w) for w in net.weights],
                    [np.zeros_like(b) for b in net.biases])


def init_adam(net: Mlp, learning_rate=3e-4, beta1=0.9, beta2=0.999, epsilon=1e-8) -> AdamState:
    return AdamState(
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(b) for b in net.biases],
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(b) for b in net.biases],
        0, learning_rate, beta1, beta2, epsilon,
    )


def _check_input(net: Mlp, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != net.layer_sizes[0]:
        raise ShapeError(
            f"input shape {x.shape} incompatible with input width {net.layer_sizes[0]}")
    return x


def forward(net: Mlp, x) -> np.ndarray:
    """Evaluate the network on a vector (d,) or a batch (N, d). Pure."""
    x = _check_input(net, x)
    h = x
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        if l < last:
            h = np.maximum(z, 0.0)
        elif net.output == "tanh":
            h = net.output_scale * np.tanh(z)
        else:
            h = z
    return h


def backward(net: Mlp, x, output_grad):
    """Gradients of sum(output * output_grad) w.r.t. parameters and input.

    Recomputes the forward pass internally; returns (MlpGrads, input_grad)
    with input_grad matching the shape of x.
    """
    x = _check_input(net, x)
    gy = np.asarray(output_grad, dtype=np.float64)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if gy.ndim == 1 and single:
        gy = gy[None, :]
    if gy.shape != (h.shape[0], net.layer_sizes[-1]):
        raise ShapeError(f"output_grad shape {output_grad if False else gy.shape} "
                         f"does not match output ({h.shape[0]}, {net.layer_sizes[-1]})")

    last = len(net.weights) - 1
    acts = [h]          # post-activation per layer, acts[0] is the input
    pre = []            # pre-activation per layer
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w.T + b
        pre.append(z)
        if l < last:
            acts.append(np.maximum(z, 0.0))
        elif net.output == "tanh":
            acts.append(net.output_scale * np.tanh(z))
        else:
            acts.append(z)

    grads = zeros_like_grads(net)
    if net.output == "tanh":
        t = np.tanh(pre[last])
        dz = gy * net.output_scale * (1.0 - t * t)
    else:
        dz = gy
    for l in range(last, -1, -1):
        grads.weights[l] = dz.T @ acts[l]
        grads.biases[l] = dz.sum(axis=0)
        if l > 0:
            dh = dz @ net.weights[l]
            dz = dh * (pre[l - 1] > 0.0)
    gx = dz @ net.weights[0]
    return grads, gx[0] if single else gx


def adam_step(net: Mlp, grads: MlpGrads, state: AdamState) -> None:
    """One bias-corrected Adam update, in place. Rejects non-finite gradients
    before touching any parameter."""
    for g in grads.weights + grads.biases:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient passed to adam_step")
    state.step_count += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step_count
    c2 = 1.0 - b2 ** state.step_count
    params = net.weights + net.biases
    gs = grads.weights + grads.biases
    ms = state.m_weights + state.m_biases
    vs = state.v_weights + state.v_biases
    for p, g, m, v in zip(params, gs, ms, vs):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon)


def soft_update(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """Polyak step: target <- tau * online + (1 - tau) * target, in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if target.layer_sizes != online.layer_sizes:
        raise ShapeError("target and online layer sizes differ")
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob
    return target


def clone_mlp(net: Mlp) -> Mlp:
    return Mlp(list(net.layer_sizes), [w.copy() for w in net.weights],
               [b.copy() for b in net.biases], net.output, net.output_scale)


def copy_params(dst: Mlp, src: Mlp) -> None:
    """Copy parameters of src into dst (shapes must match)."""
    if dst.layer_sizes != src.layer_sizes:
        raise ShapeError("cannot copy between different architectures")
    for dw, sw in zip(dst.weights, src.weights):
        dw[...] = sw
    for db, sb in zip(dst.biases, src.biases):
        db[...] = sb


# ---------------------------------------------------------------------------
# Checkpoint files
# ---------------------------------------------------------------------------
#
# A checkpoint is a single .npz holding any number of named networks plus
# optional Adam states. Layout: a "meta" entry with a JSON document
# {"version": 1, "nets": {name: {layer_sizes, output, output_scale,
# has_adam, adam: {...scalars}}}} and flat arrays under "<name>/w<l>",
# "<name>/b<l>", and "<name>/adam_{mw,mb,vw,vb}<l>". Round-trip stable.

def save_checkpoint(path, nets: dict[str, Mlp], adam: dict[str, AdamState] | None = None,
                    extra: dict | None = None) -> None:
    adam = adam or {}
    meta = {"format": "nets", "version": CHECKPOINT_VERSION, "nets": {}, "extra": extra or {}}
    arrays = {}
    for name, net in nets.items():
        st = adam.get(name)
        meta["nets"][name] = {
            "layer_sizes": net.layer_sizes,
            "output": net.output,
            "output_scale": net.output_scale,
            "has_adam": st is not None,
            "adam": None if st is None else {
                "step_count": st.step_count, "learning_rate": st.learning_rate,
                "beta1": st.beta1, "beta2": st.beta2, "epsilon": st.epsilon,
            },
        }
        for l, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{name}/w{l}"] = w
            arrays[f"{name}/b{l}"] = b
            if st is not None:
                arrays[f"{name}/adam_mw{l}"] = st.m_weights[l]
                arrays[f"{name}/adam_mb{l}"] = st.m_biases[l]
                arrays[f"{name}/adam_vw{l}"] = st.v_weights[l]
                arrays[f"{name}/adam_vb{l}"] = st.v_biases[l]
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path):
    """Returns (nets, adam_states, extra) from a file written by save_checkpoint."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != "nets" or meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path} is not a parameter checkpoint of a supported version")
        nets, states = {}, {}
        for name, info in meta["nets"].items():
            n_layers = len(info["layer_sizes"]) - 1
            weights = [data[f"{name}/w{l}"] for l in range(n_layers)]
            biases = [data[f"{name}/b{l}"] for l in range(n_layers)]
            nets[name] = Mlp(info["layer_sizes"], weights, biases,
                             info["output"], info["output_scale"])
            if info["has_adam"]:
                a = info["adam"]
                states[name] = AdamState(
                    [data[f"{name}/adam_mw{l}"] for l in range(n_layers)],
                    [data[f"{name}/adam_mb{l}"] for l in range(n_layers)],
                    [data[f"{name}/adam_vw{l}"] for l in range(n_layers)],
                    [data[f"{name}/adam_vb{l}"] for l in range(n_layers)],
                    a["step_count"], a["learning_rate"], a["beta1"], a["beta2"], a["epsilon"],
                )
        return nets, states, meta.get("extra", {})
