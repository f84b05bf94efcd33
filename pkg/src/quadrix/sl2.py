"""Small SL_2(R) helpers: matrix/4-vector conversion, log and exp.

A 2x2 matrix [[a, b], [c, d]] is flattened to (a, b, c, d).
"""

from __future__ import annotations

import numpy as np


def as_matrix(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(2, 2)


def left_mult_matrix(g) -> np.ndarray:
    """The 4x4 matrix of y -> g y on flattened 2x2 matrices."""
    return np.kron(as_matrix(g), np.eye(2))


def inverse(g) -> np.ndarray:
    a, b, c, d = np.asarray(g, dtype=float).reshape(4)
    det = a * d - b * c
    return np.array([d, -b, -c, a]) / det


def matmul(g, y: np.ndarray) -> np.ndarray:
    """g times each row of y, both flattened; y has shape (..., 4)."""
    a, b, c, d = np.asarray(g, dtype=float).reshape(4)
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape, dtype=float)
    out[..., 0] = a * y[..., 0] + b * y[..., 2]
    out[..., 1] = a * y[..., 1] + b * y[..., 3]
    out[..., 2] = c * y[..., 0] + d * y[..., 2]
    out[..., 3] = c * y[..., 1] + d * y[..., 3]
    return out


def log_norm(y: np.ndarray) -> np.ndarray:
    """Frobenius norm of the principal logarithm of each row of y (det 1).

    Rows with trace <= -2 have no logarithm in the chart and get +inf.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = y[:, 0] + y[:, 3]
    half = t / 2
    m = y.copy()
    m[:, 0] -= half
    m[:, 3] -= half
    fro = np.sqrt(np.sum(m * m, axis=1))
    factor = np.empty_like(t)
    near = np.abs(half - 1) < 1e-6
    ell = (np.abs(half) < 1) & ~near
    hyp = (half > 1) & ~near
    theta = np.arccos(np.clip(half[ell], -1, 1))
    factor[ell] = theta / np.sin(theta)
    mu = np.arccosh(half[hyp])
    factor[hyp] = mu / np.sinh(mu)
    factor[near] = 1 + (1 - half[near]) / 3
    out = factor * fro
    out[half <= -1] = np.inf
    return out


def exp(X) -> np.ndarray:
    """exp of a traceless 2x2 matrix given flattened."""
    u, v, w, _ = np.asarray(X, dtype=float).reshape(4)
    lam2 = u * u + v * w
    if lam2 > 1e-14:
        lam = np.sqrt(lam2)
        ch, sh = np.cosh(lam), np.sinh(lam) / lam
    elif lam2 < -1e-14:
        lam = np.sqrt(-lam2)
        ch, sh = np.cos(lam), np.sin(lam) / lam
    else:
        ch, sh = 1 + lam2 / 2, 1 + lam2 / 6
    return np.array([ch + sh * u, sh * v, sh * w, ch - sh * u])
