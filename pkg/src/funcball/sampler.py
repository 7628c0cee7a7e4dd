"""Exact uniform sampling on the dimension-n sections of the p-ball.

The construction draws g_1..g_n i.i.d. with density proportional to
exp(-|t|^p / p) (via Z ~ Gamma(1/p), |g| = (p Z)^(1/p), a uniform sign in
the signed case) and an independent W ~ Exp(1), then normalizes

    x_k = n^(1/p) R * g_k / (sum_i |g_i|^p + p W)^(1/p).

The power vector (|x_1|^p, ..., |x_n|^p) / (n R^p) is then Dirichlet with
the exponential slack absorbing the radius, which is exactly the law of a
uniform point of {sum |x_k|^p <= n R^p}: no rejection, O(n) per sample.
Dropping the signs yields the positive quadrant.

All randomness flows through ``numpy.random.Generator`` streams derived
from a :class:`SeedSpec`, so every sequence is reproducible and worker
substreams are statistically independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ball import BallSpec, PExponent
from .exceptions import ConfigurationError, DomainError
from .kernels import ball_transform, pow_sum_rows

MEMBERSHIP_SLACK = 1e-12


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus a stream index; equal specs reproduce equal streams."""

    root_seed: int
    stream_index: int = 0

    def seed_sequence(self, *extra: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.root_seed, spawn_key=(self.stream_index, *extra))

    def generator(self, *extra: int) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence(*extra))


def as_seed(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))


def derive_substream(seed: SeedSpec, worker: int) -> np.random.Generator:
    """Independent generator for one worker; injective in (seed, worker)."""
    if worker < 0:
        raise DomainError(f"worker index must be nonnegative, got {worker}")
    return as_seed(seed).generator(worker)


@dataclass(frozen=True)
class SamplePoint:
    """One point of a dimension-n section, validated on construction.

    With ``weights`` None the constraint is sum |x_k|^p <= n R^p; a weighted
    point instead satisfies sum |x_k|^p dt_k <= R^p.
    """

    coords: np.ndarray
    n: int
    spec: BallSpec
    weights: np.ndarray | None = None

    def __post_init__(self):
        p = self.spec.p.value
        if self.weights is None:
            budget = self.spec.power_budget(self.n)
            total = float(pow_sum_rows(self.coords.reshape(1, -1), p)[0])
        else:
            budget = self.spec.R**p
            total = float(np.sum(np.abs(self.coords) ** p * self.weights))
        if total > budget * (1.0 + MEMBERSHIP_SLACK):
            raise DomainError(f"point violates the section constraint: {total} > {budget}")
        if not self.spec.is_full and np.any(self.coords < 0):
            raise DomainError("negative coordinate on the positive quadrant")


def sample_generalized_gaussian(p: PExponent, signed: bool, rng: np.random.Generator, size=None):
    """Draws with density proportional to exp(-|x|^p / p).

    Inverts the Gamma transform: Z ~ Gamma(1/p, rate 1) and x = (p Z)^(1/p),
    with an independent uniform sign when ``signed``.  NumPy's gamma sampler
    is exact for shapes below 1, which is the regime here (shape = 1/p <= 1).
    """
    if signed and not p.is_even_numerator:
        raise ConfigurationError(f"signed draws need an even-numerator exponent, got p={p}")
    pv = p.value
    z = rng.standard_gamma(1.0 / pv, size=size)
    x = (pv * z) ** (1.0 / pv)
    if signed:
        x = x * (rng.integers(0, 2, size=size) * 2.0 - 1.0)
    return x


def _raw_unit_batch(n: int, spec: BallSpec, rng: np.random.Generator, count: int, scale: float):
    """count uniform points of {sum |x_k|^p <= scale^p}; draw order Z, W, signs."""
    pv = spec.p.value
    z = rng.standard_gamma(1.0 / pv, size=(count, n))
    w = rng.standard_exponential(count)
    if spec.is_full:
        signs = rng.integers(0, 2, size=(count, n)) * 2.0 - 1.0
    else:
        signs = None
    return ball_transform(z, w, signs, pv, scale)


def sample_ball_batch(n: int, spec: BallSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, n) array of independent uniform points of the dimension-n section."""
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    return _raw_unit_batch(n, spec, rng, count, spec.support_radius(n))


def sample_ball_uniform(n: int, spec: BallSpec, rng: np.random.Generator) -> SamplePoint:
    coords = sample_ball_batch(n, spec, rng, 1)[0]
    return SamplePoint(coords=coords, n=n, spec=spec)


def check_weights(weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise DomainError("all discretization weights must be positive")
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"weights must sum to 1, got {total}")
    return weights


def sample_weighted_ball_batch(
    n: int, spec: BallSpec, weights, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Uniform points of the anisotropic section {sum |x_k|^p dt_k <= R^p}.

    A diagonal map of a uniform point y of {sum |y_k|^p <= R^p}:
    x_k = y_k * dt_k^(-1/p).  Constant Jacobian, so uniformity survives.
    """
    weights = check_weights(weights)
    if weights.size != n:
        raise DomainError(f"need {n} weights, got {weights.size}")
    y = _raw_unit_batch(n, spec, rng, count, spec.R)
    return y * weights ** (-1.0 / spec.p.value)


def sample_weighted_ball_uniform(
    n: int, spec: BallSpec, weights, rng: np.random.Generator
) -> SamplePoint:
    coords = sample_weighted_ball_batch(n, spec, weights, rng, 1)[0]
    return SamplePoint(coords=coords, n=n, spec=spec, weights=np.asarray(weights, float))
