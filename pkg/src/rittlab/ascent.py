"""Multi-start ascent for sup_x N(x) / ||x||_p with a smooth outer norm N.

Callers supply ``value_grad(X)`` returning ``N(x)^2`` and its Wirtinger
gradient with respect to conj(x) for a batch of column vectors.  The ratio
is maximised with L-BFGS on log N^2 - log ||x||_p^2 over (Re x, Im x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import vec_norm

EPS = 1e-300


def norm_sq_grad(V, q, axis=-1):
    """||v||_q^2 and d/d conj(v) of it, along ``axis``."""
    a = np.abs(V)
    if q == 2.0:
        return (a * a).sum(axis=axis), V
    if math.isinf(q):
        val = a.max(axis=axis)
        idx = np.argmax(a, axis=axis)
        G = np.zeros_like(V)
        np.put_along_axis(G, np.expand_dims(idx, axis), np.take_along_axis(V, np.expand_dims(idx, axis), axis), axis)
        return val ** 2, G
    nrm = vec_norm(V, q, axis=axis)
    safe = np.where(nrm > 0, nrm, 1.0)
    if q < 2.0:
        aq = np.where(a > 0, a, 1.0) ** (q - 2.0) * (a > 0)
    else:
        aq = a ** (q - 2.0)
    G = np.expand_dims(safe ** (2.0 - q), axis) * aq * V
    return nrm ** 2, G


@dataclass
class AscentResult:
    value: float
    witness: np.ndarray
    values: list
    starts: int


def maximize_ratio(value_grad, n, p, starts, maxiter=300):
    """Maximise sqrt(value_grad(x)[0]) / ||x||_p from every column of ``starts``.

    ``value_grad`` maps a 1-d complex vector to ``(N^2, grad_conj)``.
    """
    def obj(z):
        x = z[:n] + 1j * z[n:]
        NN, g = value_grad(x)
        XX, gx = norm_sq_grad(x, p, axis=0)
        if NN <= EPS or XX <= EPS:
            return 0.0, np.zeros(2 * n)
        f = -math.log(NN) + math.log(XX)
        cg = -g / NN + gx / XX
        return f, 2.0 * np.concatenate([cg.real, cg.imag])

    best, best_x, vals = -math.inf, None, []
    for j in range(starts.shape[1]):
        x0 = starts[:, j]
        nx = vec_norm(x0, p)
        if nx == 0:
            continue
        x0 = x0 / nx
        res = minimize(obj, np.concatenate([x0.real, x0.imag]), jac=True, method="L-BFGS-B",
                       options={"maxiter": maxiter, "gtol": 1e-12, "ftol": 1e-15})
        cands = [x0, res.x[:n] + 1j * res.x[n:]]
        for x in cands:
            nx = vec_norm(x, p)
            if nx == 0:
                continue
            v = math.sqrt(max(value_grad(x)[0], 0.0)) / nx
            vals.append(v)
            if v > best:
                best, best_x = v, x / nx
    return AscentResult(float(best), best_x, vals, starts.shape[1])


def default_starts(stack, n, count, seed):
    """Start vectors: top right singular vector of the stacked operator, basis and random vectors."""
    rng = np.random.default_rng(seed)
    cols = []
    if stack is not None and stack.size:
        _, _, vh = np.linalg.svd(stack.reshape(-1, n), full_matrices=False)
        cols.append(np.conj(vh[0]))
    cols.append(np.ones(n, complex))
    for i in range(min(n, max(0, count // 3))):
        cols.append(np.eye(n, dtype=complex)[i])
    while len(cols) < count:
        cols.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return np.stack(cols[:count], axis=1)
