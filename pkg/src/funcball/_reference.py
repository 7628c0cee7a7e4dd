"""NumPy reference implementations of the hot sampling kernels.

Selected at import time when the compiled extension is unavailable (or when
``FUNCBALL_PURE_PYTHON`` is set).  Must stay semantically identical to
``_native.pyx``; the test suite asserts agreement to 1e-12.
"""

from __future__ import annotations

import numpy as np

BACKEND = "reference"


def ball_transform(gamma_draws, exp_draws, signs, p, scale):
    """Turn Gamma(1/p) rows into uniform p-ball coordinates.

    Row i of the result is

        scale * signs[i, k] * (Z[i, k] / (sum_j Z[i, j] + W[i]))^(1/p),

    the exact normalization that makes the row uniform on
    {sum |x_k|^p <= scale^p}.  ``signs`` may be None (positive quadrant).
    """
    z = np.asarray(gamma_draws, dtype=float)
    w = np.asarray(exp_draws, dtype=float)
    total = z.sum(axis=1) + w
    out = (z / total[:, None]) ** (1.0 / p)
    out *= scale
    if signs is not None:
        out *= signs
    return out


def pow_sum_rows(x, p):
    """Row-wise sum of |x|^p (the section-membership statistic)."""
    x = np.asarray(x, dtype=float)
    if p == 2.0:
        return np.einsum("ij,ij->i", x, x)
    if p == 1.0:
        return np.abs(x).sum(axis=1)
    return (np.abs(x) ** p).sum(axis=1)


def pwl_mean_square(values):
    """Integral over [0,1] of the squared piecewise-linear interpolant.

    Knots sit at t_k = k/n with values[i, k-1] at t_k; the value at t_0 = 0
    repeats the first coordinate.  Exact per-segment quadratic integration:
    h/3 * (v_left^2 + v_left*v_right + v_right^2).
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[1]
    left = v[:, :-1]
    right = v[:, 1:]
    inner = (left * left + left * right + right * right).sum(axis=1)
    first = 3.0 * v[:, 0] * v[:, 0]  # flat first segment: v_0 = v_1
    return (inner + first) / (3.0 * n)
