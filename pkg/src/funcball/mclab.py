"""Monte Carlo side of the functional averages.

Discretizes Y = int g(x(t)) dt on the grid t_k = k/n, samples the
dimension-n section of the ball uniformly, and estimates the mean and the
variance of Y_n = (1/n) sum g(x_k) (or its multivariate / block-weighted /
piecewise-linear variants) across samples.  The running theme the
experiments expose: Var[Y_n] decays to zero with n (the concentration
statement), while E[Y_n] approaches the closed form with an O(1/n)
discretization bias that is *not* covered by the Monte Carlo standard
error once the sample count is large.

Reproducibility: samples are drawn in fixed-size blocks, block b from the
substream (seed, run, b), and the per-block moments are merged in block
order.  Results are therefore bit-identical for a given seed at any worker
count, and worker parallelism only changes wall-clock time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import averages as avg
from .ball import BallSpec
from .exceptions import ConfigurationError, DomainError
from .kernels import pow_sum_rows, pwl_mean_square
from .quadrature import (
    QuadratureSettings,
    kernel_integral_finite_n,
    kernel_limit_integral,
)
from .sampler import (
    SeedSpec,
    as_seed,
    sample_ball_batch,
    sample_weighted_ball_batch,
)

BLOCK_SAMPLES = 8192


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    variance: float  # variance of Y_n across samples (ddof=1)
    stderr: float
    n: int
    samples: int
    seed: SeedSpec

    @classmethod
    def from_moments(cls, count, mean, m2, n, seed):
        variance = m2 / (count - 1) if count > 1 else 0.0
        variance = max(variance, 0.0)
        return cls(
            mean=mean,
            variance=variance,
            stderr=math.sqrt(variance / count),
            n=n,
            samples=count,
            seed=seed,
        )


def _merge_moments(a, b):
    (na, ma, m2a), (nb, mb, m2b) = a, b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    return (n, ma + delta * nb / n, m2a + m2b + delta * delta * na * nb / n)


def _block_moments(values):
    values = np.asarray(values, dtype=float)
    count = values.size
    mean = float(values.mean())
    m2 = float(np.sum((values - mean) ** 2))
    return (count, mean, m2)


def _accumulate(seed: SeedSpec, samples: int, batch_fn, run: int = 0, threads: int = 1):
    """Merge per-block moments of batch_fn(rng, count) in block order."""
    if samples < 1:
        raise DomainError(f"need at least one sample, got {samples}")
    blocks = []
    remaining = samples
    index = 0
    while remaining > 0:
        count = min(BLOCK_SAMPLES, remaining)
        blocks.append((index, count))
        remaining -= count
        index += 1

    def one_block(block):
        b, count = block
        return _block_moments(batch_fn(seed.generator(run, b), count))

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one_block, blocks))
    else:
        partials = [one_block(block) for block in blocks]
    total = (0, 0.0, 0.0)
    for partial in partials:
        total = _merge_moments(total, partial)
    return total


# ------------------------------------------------------------ discretization


def time_grid(n: int) -> np.ndarray:
    """Right-endpoint grid t_k = k/n, k = 1..n."""
    return np.arange(1, n + 1) / n


def interval_index_slice(interval, n: int) -> slice:
    """[a, b] -> 1-based indices ceil(n a)+1 .. floor(n b), as a 0-based slice."""
    a, b = interval
    lo = math.ceil(n * a - 1e-12 * n)
    hi = math.floor(n * b + 1e-12 * n)
    return slice(max(lo, 0), min(hi, n))


def _functional_values(functional: avg.FunctionalSpec, x: np.ndarray, n: int) -> np.ndarray:
    """Y_n for every sample row of x."""
    g = functional.g
    a = functional.time_weight
    t = time_grid(n)
    slices = [interval_index_slice(iv, n) for iv in functional.intervals]
    if functional.m == 1:
        sl = slices[0]
        gx = g(x[:, sl])
        if a is not None:
            gx = gx * np.array([a(tk) for tk in t[sl]], dtype=float)
        return gx.sum(axis=1) / n
    # general m: per-sample tensor sum over the index ranges (cost n^m each)
    weights = None
    if a is not None:
        axes = np.meshgrid(*[t[sl] for sl in slices], indexing="ij")
        weights = np.vectorize(a)(*axes)
    out = np.empty(x.shape[0])
    scale = float(n) ** functional.m
    for i, row in enumerate(x):
        grids = np.meshgrid(*[row[sl] for sl in slices], indexing="ij", sparse=True)
        values = g(*grids)
        if weights is not None:
            values = values * weights
        out[i] = np.sum(values) / scale
    return out


# ------------------------------------------------------------------ main ops


def mc_functional_average(
    functional: avg.FunctionalSpec,
    n: int,
    spec: BallSpec,
    samples: int,
    seed,
    threads: int = 1,
) -> MCEstimate:
    """Empirical mean and variance of Y_n over uniform section samples."""
    seed = as_seed(seed)
    if n < functional.m:
        raise DomainError(f"need n >= m, got n={n}, m={functional.m}")

    def batch(rng, count):
        x = sample_ball_batch(n, spec, rng, count)
        return _functional_values(functional, x, n)

    count, mean, m2 = _accumulate(seed, samples, batch, threads=threads)
    return MCEstimate.from_moments(count, mean, m2, n, seed)


@dataclass(frozen=True)
class ConvergenceRecord:
    entries: tuple  # ((n, MCEstimate), ...)
    target: float  # closed-form EY
    decay_exponent: float  # log-log slope of Var[Y_n] against n


def fit_decay_exponent(ns, variances) -> float:
    ns = np.asarray(ns, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if np.any(variances <= 0.0) or ns.size < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(ns), np.log(variances), 1)
    return float(slope)


def mc_variance_decay(
    functional: avg.FunctionalSpec,
    n_list: Sequence[int],
    spec: BallSpec,
    samples: int,
    seed,
    threads: int = 1,
    settings: QuadratureSettings | None = None,
) -> ConvergenceRecord:
    """Var[Y_n] against n, with a fitted power-law exponent."""
    seed = as_seed(seed)
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list[:-1], n_list[1:])):
        raise DomainError("n_list must be strictly increasing")
    entries = []
    for run, n in enumerate(n_list):

        def batch(rng, count, n=n):
            x = sample_ball_batch(n, spec, rng, count)
            return _functional_values(functional, x, n)

        count, mean, m2 = _accumulate(seed, samples, batch, run=run, threads=threads)
        entries.append((n, MCEstimate.from_moments(count, mean, m2, n, seed)))
    target = avg.average_multivariate(
        functional.g, functional.intervals, spec, settings, functional.growth
    )
    exponent = fit_decay_exponent(n_list, [est.variance for _, est in entries])
    return ConvergenceRecord(tuple(entries), target, exponent)


def smallest_valid_n(scheme: avg.BlockScheme) -> int:
    denominators = [
        Fraction(s).limit_denominator(10**9).denominator for s, _ in scheme.blocks
    ]
    return math.lcm(*denominators)


def block_weights(scheme: avg.BlockScheme, n: int) -> np.ndarray:
    """Per-index cell widths dt_k = r_j / n, block j covering s_j n indices."""
    counts = []
    for s, _ in scheme.blocks:
        c = s * n
        if abs(c - round(c)) > 1e-9:
            raise DomainError(
                f"block fraction {s} times n={n} is not integral; "
                f"smallest valid n is {smallest_valid_n(scheme)}"
            )
        counts.append(round(c))
    if sum(counts) != n:
        raise DomainError(
            f"block sizes {counts} do not add up to n={n}; "
            f"smallest valid n is {smallest_valid_n(scheme)}"
        )
    return np.repeat([r / n for _, r in scheme.blocks], counts)


def mc_block_scheme(
    functional: avg.FunctionalSpec,
    scheme: avg.BlockScheme,
    n_base: int,
    spec: BallSpec,
    samples: int,
    seed,
    threads: int = 1,
) -> MCEstimate:
    """Estimate of Y = sum g(x_k) dt_k under the non-uniform discretization."""
    if functional.m != 1 or functional.intervals != (avg.FULL_INTERVAL,):
        raise ConfigurationError("block schemes apply to full-interval univariate Y")
    seed = as_seed(seed)
    dt = block_weights(scheme, n_base)
    g = functional.g

    def batch(rng, count):
        x = sample_weighted_ball_batch(n_base, spec, dt, rng, count)
        return (g(x) * dt).sum(axis=1)

    count, mean, m2 = _accumulate(seed, samples, batch, threads=threads)
    return MCEstimate.from_moments(count, mean, m2, n_base, seed)


class ExchangeGap(NamedTuple):
    n: int
    gap: float  # |mean of h(Y_n) - h(EY)|
    h_mean: float
    stderr: float


def mc_exchange_gap(
    h,
    functional: avg.FunctionalSpec,
    n_list: Sequence[int],
    spec: BallSpec,
    samples: int,
    seed,
    threads: int = 1,
    settings: QuadratureSettings | None = None,
):
    """Empirical |E h(Y_n) - h(EY)| along an n sweep.

    h must be NumPy-elementwise, like g.  The gap contains both the Monte
    Carlo noise and the O(1/n) discretization bias of E h(Y_n) itself.
    """
    seed = as_seed(seed)
    target = h(
        avg.average_multivariate(
            functional.g, functional.intervals, spec, settings, functional.growth
        )
    )
    rows = []
    for run, n in enumerate(n_list):

        def batch(rng, count, n=n):
            x = sample_ball_batch(n, spec, rng, count)
            return h(_functional_values(functional, x, n))

        count, mean, m2 = _accumulate(seed, samples, batch, run=run, threads=threads)
        est = MCEstimate.from_moments(count, mean, m2, n, seed)
        rows.append(ExchangeGap(n, abs(est.mean - target), est.mean, est.stderr))
    return rows


def mc_annulus(
    g,
    r: float,
    spec: BallSpec,
    n: int,
    samples: int,
    seed,
) -> tuple[MCEstimate, MCEstimate, float]:
    """Annulus estimate (rejection from the ball), ball estimate, (r/R)^n.

    Both estimators consume the same draw stream: the ball one uses every
    point, the annulus one rejects points with sum |x_k|^p < n r^p.  At
    r = 0 the two are therefore identical, and for n >= 50 the rejection
    probability (r/R)^n is already negligible.
    """
    seed = as_seed(seed)
    if not 0.0 <= r < spec.R:
        raise DomainError(f"need 0 <= r < R, got r={r}, R={spec.R}")
    functional = avg.FunctionalSpec.univariate(g)
    pv = spec.p.value
    threshold = n * r**pv
    ball_total = (0, 0.0, 0.0)
    annulus_total = (0, 0.0, 0.0)
    block = 0
    while ball_total[0] < samples or annulus_total[0] < samples:
        x = sample_ball_batch(n, spec, seed.generator(0, block), BLOCK_SAMPLES)
        if ball_total[0] < samples:
            take = x[: samples - ball_total[0]]
            values = _functional_values(functional, take, n)
            ball_total = _merge_moments(ball_total, _block_moments(values))
        if annulus_total[0] < samples:
            kept = x[pow_sum_rows(x, pv) >= threshold][: samples - annulus_total[0]]
            if kept.shape[0]:
                values = _functional_values(functional, kept, n)
                annulus_total = _merge_moments(annulus_total, _block_moments(values))
        block += 1
    annulus_est = MCEstimate.from_moments(*annulus_total, n, seed)
    ball_est = MCEstimate.from_moments(*ball_total, n, seed)
    return annulus_est, ball_est, (r / spec.R) ** n


# --------------------------------------------------- general path functionals


@dataclass(frozen=True)
class PiecewisePath:
    """Piecewise-linear interpolant of sampled coordinates.

    Knots at t_k = k/n carry the coordinates x_1..x_n; the left endpoint
    t_0 = 0 repeats x_1 (the sampler produces no x(t_0), so the first cell
    is flat).
    """

    values: np.ndarray  # the n sampled coordinates

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def knots(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def knot_values(self) -> np.ndarray:
        return np.concatenate(([self.values[0]], self.values))

    def __call__(self, t):
        return np.interp(t, self.knots, self.knot_values)

    def mean_square(self) -> float:
        """Exact int_0^1 path(t)^2 dt (piecewise quadratic in closed form)."""
        return float(pwl_mean_square(self.values.reshape(1, -1))[0])

    def max(self) -> float:
        return float(self.values.max())


def path_mean_square(path: PiecewisePath) -> float:
    return path.mean_square()


def path_mean_square_batch(x: np.ndarray) -> np.ndarray:
    return pwl_mean_square(x)


def path_max(path: PiecewisePath) -> float:
    return float(np.max(path.knot_values))


def path_max_batch(x: np.ndarray) -> np.ndarray:
    return np.max(x, axis=1)  # knot 0 repeats x_1, so row max suffices


def mc_general_functional(
    f,
    n: int,
    spec: BallSpec,
    samples: int,
    seed,
    threads: int = 1,
    batch_f=None,
) -> MCEstimate:
    """Mean of f over piecewise-linear interpolants of uniform samples.

    ``f`` receives a :class:`PiecewisePath` per sample; pass ``batch_f``
    (matrix of coordinate rows -> vector) to skip the per-path Python loop
    when a vectorized form exists.
    """
    seed = as_seed(seed)

    def batch(rng, count):
        x = sample_ball_batch(n, spec, rng, count)
        if batch_f is not None:
            return batch_f(x)
        return np.array([f(PiecewisePath(row)) for row in x], dtype=float)

    count, mean, m2 = _accumulate(seed, samples, batch, threads=threads)
    return MCEstimate.from_moments(count, mean, m2, n, seed)


# ------------------------------------------------------------- kernel limits


class KernelRow(NamedTuple):
    n: int
    kernel_value: float
    limit_value: float
    gap: float


def kernel_limit_report(
    f,
    p,
    n0: int,
    n_list: Sequence[int],
    settings: QuadratureSettings | None = None,
    growth=None,
):
    """Finite-n kernel integrals against their exponential-weight limit."""
    limit = kernel_limit_integral(f, p, settings, growth).value
    rows = []
    for n in n_list:
        value = kernel_integral_finite_n(f, n, n0, p, settings).value
        rows.append(KernelRow(n, value, limit, abs(value - limit)))
    return rows
