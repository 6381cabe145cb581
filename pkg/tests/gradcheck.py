"""Finite-difference gradient checking against the live kernels.

The trick for per-position PV-DM gradients: run one epoch with a one-hot
learning-rate vector. Only the chosen position updates parameters, and it
does so before later positions are visited, so (before - after) / alpha
recovers that position's exact gradient at the initial parameters. With
an all-zero rate vector the kernel is a pure loss oracle for central
differences.
"""

from __future__ import annotations

import numpy as np

from prereqchain import kernels


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-8) -> float:
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / scale).max())


def pvdm_loss(params, tokens, doc_bounds, negatives, window):
    """Total PV-DM loss at fixed parameters (zero learning rate)."""
    word, doc, out = (p.copy() for p in params)
    zeros = np.zeros(tokens.shape[0])
    return kernels.pvdm_epoch(tokens, doc_bounds, word, doc, out,
                              negatives, zeros, window, True)


def pvdm_analytic_grads(params, tokens, doc_bounds, negatives, window,
                        alpha: float = 1e-6):
    """Exact summed per-position gradients extracted from kernel updates."""
    grads = [np.zeros_like(p) for p in params]
    n_pos = tokens.shape[0]
    for t in range(n_pos):
        word, doc, out = (p.copy() for p in params)
        alphas = np.zeros(n_pos)
        alphas[t] = alpha
        kernels.pvdm_epoch(tokens, doc_bounds, word, doc, out,
                           negatives, alphas, window, True)
        for g, before, after in zip(grads, params, (word, doc, out)):
            g += (before - after) / alpha
    return grads


def pvdm_fd_grads(params, tokens, doc_bounds, negatives, window,
                  eps: float = 1e-6):
    """Central finite differences of the total loss over every entry."""
    grads = []
    for i, p in enumerate(params):
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.shape[0]):
            orig = flat[j]
            flat[j] = orig + eps
            hi = pvdm_loss(params, tokens, doc_bounds, negatives, window)
            flat[j] = orig - eps
            lo = pvdm_loss(params, tokens, doc_bounds, negatives, window)
            flat[j] = orig
            gflat[j] = (hi - lo) / (2 * eps)
        grads.append(g)
    return grads


def fd_gradient(loss_fn, theta: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Generic central-difference gradient of loss_fn at theta."""
    g = np.zeros_like(theta)
    flat = theta.reshape(-1)
    gflat = g.reshape(-1)
    for j in range(flat.shape[0]):
        orig = flat[j]
        flat[j] = orig + eps
        hi = loss_fn(theta)
        flat[j] = orig - eps
        lo = loss_fn(theta)
        flat[j] = orig
        gflat[j] = (hi - lo) / (2 * eps)
    return g
