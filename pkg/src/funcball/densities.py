"""Coordinate densities on dimension-n sections of the p-ball and their limits.

For the section {sum |x_k|^p <= n R^p} sampled uniformly, a single
coordinate has density

    rho_n(x) = p Gamma(1+n/p) / (2 R n^(1/p) Gamma(1/p) Gamma(1+(n-1)/p))
               * (1 - |x|^p / (n R^p))^((n-1)/p)

on |x| <= R n^(1/p) (coefficient doubled and support [0, R n^(1/p)] on the
positive quadrant), and rho_n converges pointwise to the generalized
Gaussian / exponential family

    rho(x) = exp(-|x|^p / (p R^p)) / (2 R Gamma(1/p) p^(1/p-1)).

k distinct coordinates carry the analogous joint formula with exponent
(n-k)/p; in the limit they factor into a product of marginals, i.e. become
independent.  All coefficients are evaluated through log-Gamma differences
so the formulas stay finite for very large n.

The functions accept scalars or NumPy arrays in the coordinate argument and
return densities that are exactly zero outside the stated supports.
"""

from __future__ import annotations

import math

import numpy as np

from .ball import BallSpec, PExponent, Quadrant, ball  # noqa: F401  (re-exported)
from .exceptions import DomainError
from .special import log_gamma, log_normalization_constant

__all__ = [
    "PExponent",
    "BallSpec",
    "Quadrant",
    "ball",
    "coordinate_density_finite",
    "coordinate_density_limit",
    "joint_density_finite",
    "joint_density_limit",
    "gamma_transform_density",
    "finite_coordinate_cdf",
]


def _log_finite_coeff(n: int, k: int, spec: BallSpec) -> float:
    """log of the joint finite-n coefficient for k coordinates."""
    p = spec.p.value
    log_c = (
        k * math.log(p)
        + log_gamma(1.0 + n / p)
        - k * math.log(spec.R)
        - (k / p) * math.log(n)
        - k * log_gamma(1.0 / p)
        - log_gamma(1.0 + (n - k) / p)
    )
    if spec.is_full:
        log_c -= k * math.log(2.0)
    return log_c


def _pow_fraction(x, spec: BallSpec):
    """|x|^p / (n R^p) building block as u = |x/R|^p, plus the sign mask.

    Returns (u, valid) where valid marks coordinates inside the quadrant.
    Negative coordinates on the positive quadrant are not errors; they just
    carry zero density.
    """
    p = spec.p.value
    x = np.asarray(x, dtype=float)
    u = np.abs(x / spec.R) ** p
    valid = np.ones(x.shape, dtype=bool) if spec.is_full else (x >= 0)
    return u, valid


def _scalar_out(value, scalar: bool):
    return float(value) if scalar else value


def coordinate_density_finite(x, n: int, spec: BallSpec):
    """Density of one coordinate of a uniform point in the dimension-n section."""
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    u, valid = _pow_fraction(x, spec)
    t = 1.0 - u / n
    inside = valid & (t > 0.0)
    log_c = _log_finite_coeff(n, 1, spec)
    out = np.zeros(np.shape(u), dtype=float)
    if n == 1:
        # exponent (n-1)/p = 0: flat on the support
        out[inside] = math.exp(log_c)
    else:
        exponent = (n - 1) / spec.p.value
        out[inside] = np.exp(log_c + exponent * np.log1p(-u[inside] / n))
    return _scalar_out(out, scalar)


def coordinate_density_limit(x, spec: BallSpec):
    """Limiting (n -> infinity) coordinate density."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    u, valid = _pow_fraction(x, spec)
    log_c = log_normalization_constant(spec.p, spec.R, spec.quadrant)
    out = np.where(valid, np.exp(-u / spec.p.value - log_c), 0.0)
    return _scalar_out(out, scalar)


def joint_density_finite(xs, n: int, spec: BallSpec) -> float:
    """Joint density of k distinct coordinates in the dimension-n section."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    k = xs.size
    if k == 0:
        raise DomainError("need at least one coordinate")
    if k > n:
        raise DomainError(f"asked for {k} coordinates in dimension {n}")
    u, valid = _pow_fraction(xs, spec)
    if not valid.all():
        return 0.0
    total = float(np.sum(u))
    t = 1.0 - total / n
    if t <= 0.0:
        return 0.0
    log_c = _log_finite_coeff(n, k, spec)
    if n == k:
        return math.exp(log_c)
    return math.exp(log_c + ((n - k) / spec.p.value) * math.log1p(-total / n))


def joint_density_limit(xs, spec: BallSpec) -> float:
    """Limiting joint density; exactly the product of the marginals."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size == 0:
        raise DomainError("need at least one coordinate")
    marginals = coordinate_density_limit(xs, spec)
    return float(np.prod(marginals))


def gamma_transform_density(z, alpha: float, beta: float):
    """Gamma(alpha, rate beta) density.

    With alpha = 1/p this is the law of Z = |x|^p / (p beta) when x follows
    the limiting coordinate density, which is how the family above turns
    into the classical Gamma distribution.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    scalar = np.isscalar(z) or np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape, dtype=float)
    pos = z > 0.0
    log_c = alpha * math.log(beta) - log_gamma(alpha)
    out[pos] = np.exp(log_c + (alpha - 1.0) * np.log(z[pos]) - beta * z[pos])
    if alpha == 1.0:
        out[z == 0.0] = beta
    elif alpha < 1.0:
        out[z == 0.0] = math.inf
    return _scalar_out(out, scalar)


def finite_coordinate_cdf(x, n: int, spec: BallSpec):
    """Exact CDF of one coordinate in the dimension-n section.

    |x/R|^p / n of a uniform section point is Beta(1/p, (n-1)/p + 1), which
    gives the CDF through the regularized incomplete beta function.  Used as
    the reference law for goodness-of-fit tests of the sampler.
    """
    from scipy.special import betainc

    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    p = spec.p.value
    x = np.asarray(x, dtype=float)
    u = np.clip(np.abs(x / spec.R) ** p / n, 0.0, 1.0)
    half = betainc(1.0 / p, (n - 1.0) / p + 1.0, u)
    if spec.is_full:
        out = 0.5 + 0.5 * np.sign(x) * half
    else:
        out = np.where(x < 0, 0.0, half)
    return _scalar_out(out, scalar)
