"""Shared test utilities: finite-difference oracles over network parameters."""

import numpy as np

from comorph.net import Mlp


def param_arrays(net: Mlp):
    return net.weights + net.biases


def grad_arrays(grads):
    return grads.weights + grads.biases


def fd_gradient(scalar_fn, net: Mlp, h=1e-5):
    """Central finite differences of scalar_fn() w.r.t. every parameter of net.

    scalar_fn re-evaluates the quantity from the (mutated) parameters, so this
    stays independent of the reverse-mode path it is checking.
    """
    out = []
    for arr in param_arrays(net):
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = scalar_fn()
            flat[i] = orig - h
            down = scalar_fn()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        out.append(g)
    return out


def max_rel_err(analytic, fd):
    """Worst relative disagreement, guarded for near-zero gradients."""
    worst = 0.0
    for a, f in zip(analytic, fd):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1.0)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst
