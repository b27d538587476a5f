"""Central finite differences on real coordinate vectors.

Steps are relative: ``h_i = step * (1 + |x_i|)``.  Functions may return
scalars or arrays (real or complex); derivative axes are prepended.
"""

from __future__ import annotations

import numpy as np

FIRST_STEP = 1e-5
SECOND_STEP = 1e-4


def _steps(x: np.ndarray, step: float) -> np.ndarray:
    return step * (1.0 + np.abs(x))


def gradient(f, x, step: float = FIRST_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = _steps(x, step)
    out = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h[i]))
    return np.array(out)


def hessian(f, x, step: float = SECOND_STEP, f0=None) -> np.ndarray:
    """Second derivatives ``d_i d_j f``; symmetric in the leading two axes."""
    x = np.asarray(x, dtype=float)
    N = x.size
    h = _steps(x, step)
    f0 = np.asarray(f(x)) if f0 is None else np.asarray(f0)
    H = np.zeros((N, N) + f0.shape, dtype=np.result_type(f0, float))
    E = np.diag(h)
    for i in range(N):
        H[i, i] = (np.asarray(f(x + E[i])) - 2 * f0 + np.asarray(f(x - E[i]))) / h[i] ** 2
        for j in range(i + 1, N):
            d = (
                np.asarray(f(x + E[i] + E[j]))
                - np.asarray(f(x + E[i] - E[j]))
                - np.asarray(f(x - E[i] + E[j]))
                + np.asarray(f(x - E[i] - E[j]))
            ) / (4 * h[i] * h[j])
            H[i, j] = H[j, i] = d
    return H
