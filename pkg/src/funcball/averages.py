"""Closed-form average values of integral functionals on the p-ball.

For Y = int_0^1 g(x(t)) dt on the full ball the average is

    EY = 1 / (2 Gamma(1/p) p^(1/p-1)) * int g(R x) exp(-x^p / p) dx,

with the obvious quadrant / multivariate / subinterval variants: a
subinterval multiplies by its length, m integration variables tensor the
weight and divide by the m-th power of the constant.  The variance of every
such functional is exactly zero (the coordinates decouple in the limit, so
E(Y^2) = (EY)^2), which is also why averages commute with smooth outer
functions: E h(Y) = h(EY).

Non-uniform discretizations change the answer: a block scheme with weights
{(s_j, r_j)} averages the rescaled integrand sum_j s_j r_j g(r_j^(-1/p) x)
instead of g.  Annuli r <= ||x||_p <= R inherit the full-ball average
(the inner ball carries vanishing volume fraction (r/R)^n), and averages
over the whole space are defined as the R -> infinity limit when it exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .ball import BallSpec
from .exceptions import ConfigurationError, DomainError
from .expr import GrowthBound
from .quadrature import (
    QuadratureSettings,
    weighted_integral_1d,
    weighted_integral_nd,
)
from .special import spec_normalization

Interval = tuple[float, float]
FULL_INTERVAL: Interval = (0.0, 1.0)


def _check_interval(interval: Interval) -> Interval:
    a, b = float(interval[0]), float(interval[1])
    if not (0.0 <= a <= b <= 1.0):
        raise DomainError(f"interval {interval} is not within [0, 1]")
    return (a, b)


def interval_length(interval: Interval) -> float:
    a, b = _check_interval(interval)
    return b - a


@dataclass(frozen=True)
class FunctionalSpec:
    """Y = int_{I_1} ... int_{I_m} [a(t)] g(x(t_1), ..., x(t_m)) dt.

    ``g`` must be vectorized (NumPy-elementwise) for the Monte Carlo side;
    scalar calls are all the closed-form side needs.
    """

    g: Callable
    m: int = 1
    intervals: tuple = (FULL_INTERVAL,)
    time_weight: Callable | None = None
    growth: GrowthBound | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"arity must be >= 1, got {self.m}")
        if len(self.intervals) != self.m:
            raise ConfigurationError(
                f"need {self.m} intervals, got {len(self.intervals)}"
            )
        for iv in self.intervals:
            if interval_length(iv) <= 0.0:
                raise ConfigurationError(f"interval {iv} must have positive length")

    @classmethod
    def univariate(cls, g, interval: Interval = FULL_INTERVAL, growth=None):
        return cls(g=g, m=1, intervals=(interval,), growth=growth)


@dataclass(frozen=True)
class BlockScheme:
    """Non-uniform partition data {(s_j, r_j)}: block j covers a fraction
    s_j of the n grid indices with cell width r_j / n."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((float(s), float(r)) for s, r in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ConfigurationError("scheme needs at least one block")
        if any(s <= 0 or r <= 0 for s, r in blocks):
            raise ConfigurationError("block fractions and rates must be positive")
        s_total = math.fsum(s for s, _ in blocks)
        sr_total = math.fsum(s * r for s, r in blocks)
        if abs(s_total - 1.0) > 1e-12 or abs(sr_total - 1.0) > 1e-12:
            raise ConfigurationError(
                f"scheme must satisfy sum s_j = 1 and sum s_j r_j = 1, "
                f"got {s_total} and {sr_total}"
            )

    @classmethod
    def uniform(cls):
        return cls(((1.0, 1.0),))


UNIFORM_SCHEME = BlockScheme.uniform()


def average_single(
    g, spec: BallSpec, settings: QuadratureSettings | None = None, growth=None
) -> float:
    """EY for Y = int_0^1 g(x(t)) dt."""
    R = spec.R
    integral = weighted_integral_1d(
        lambda x: g(R * x), spec.p, spec.quadrant, settings, growth
    )
    return integral.value / spec_normalization(spec.with_radius(1.0))


def average_subinterval(
    g, interval: Interval, spec: BallSpec, settings=None, growth=None
) -> float:
    """EY for Y = int_I g(x(t)) dt: the length of I scales the full average."""
    length = interval_length(interval)
    if length == 0.0:
        return 0.0
    return length * average_single(g, spec, settings, growth)


def average_multivariate(
    g, intervals: Sequence[Interval], spec: BallSpec, settings=None, growth=None
) -> float:
    """EY for Y = int_{I_1} ... int_{I_m} g(x(t_1), ..., x(t_m)) dt."""
    m = len(intervals)
    volume = 1.0
    for iv in intervals:
        volume *= interval_length(iv)
    if volume == 0.0:
        return 0.0
    R = spec.R
    integral = weighted_integral_nd(
        lambda *xs: g(*(R * x for x in xs)), m, spec.p, spec.quadrant, settings, growth
    )
    return volume * integral.value / spec_normalization(spec.with_radius(1.0)) ** m


def average_time_weighted(
    a, g, spec: BallSpec, m: int = 1, settings=None, growth=None
) -> float:
    """EY for Y = int a(t_1..t_m) g(x(t_1)..x(t_m)) dt over [0,1]^m.

    The time weight separates from the coordinate law: EY is the plain
    multivariate average times the integral of ``a`` over the unit cube.
    """
    from scipy import integrate

    if m == 1:
        weight_mass, _ = integrate.quad(a, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)
    else:
        weight_mass, _ = integrate.nquad(
            a, [(0.0, 1.0)] * m, opts={"epsabs": 1e-11, "epsrel": 1e-11}
        )
    if weight_mass == 0.0:
        return 0.0
    return weight_mass * average_multivariate(
        g, [FULL_INTERVAL] * m, spec, settings, growth
    )


def average_blocks(
    g, scheme: BlockScheme, spec: BallSpec, settings=None, growth=None
) -> float:
    """EY under the non-uniform discretization described by ``scheme``.

    Reduces to :func:`average_single` of the rescaled integrand
    sum_j s_j r_j g(r_j^(-1/p) x); the uniform scheme [(1, 1)] goes through
    the identical code path with exact unit factors.
    """
    inv_p = 1.0 / spec.p.value
    blocks = scheme.blocks

    def rescaled(x):
        return math.fsum(s * r * g(r ** (-inv_p) * x) for s, r in blocks)

    return average_single(rescaled, spec, settings, growth)


@dataclass(frozen=True)
class VarianceCertificate:
    value: float
    note: str


def variance_closed_form(functional: FunctionalSpec, spec: BallSpec) -> VarianceCertificate:
    """DY for integral-form functionals: exactly zero.

    E(Y^2) expands into pair averages E(g(x_s) g(x_t)); distinct coordinates
    are independent in the limit and the diagonal carries no t-measure, so
    E(Y^2) = (EY)^2.
    """
    return VarianceCertificate(
        value=0.0,
        note="E(Y^2) = E(g(x_s))E(g(x_t)) = (EY)^2: coordinates at distinct "
        "times are asymptotically independent and the diagonal has measure zero",
    )


def nonlinear_exchange(h, g, spec: BallSpec, settings=None, growth=None) -> float:
    """E h(Y) = h(EY) for smooth h: the exchange formula under DY = 0."""
    return h(average_single(g, spec, settings, growth))


class AnnulusAverage(NamedTuple):
    average: float
    volume_ratio: float | None


def annulus_average(
    g, r: float, spec: BallSpec, n: int | None = None, settings=None, growth=None
) -> AnnulusAverage:
    """Average over {r <= ||x||_p <= R}: equals the full-ball average.

    The dimension-n inner-ball volume fraction (r/R)^n is reported for a
    caller-supplied n to quantify how fast the annulus exhausts the ball.
    """
    if not 0.0 <= r < spec.R:
        raise DomainError(f"need 0 <= r < R, got r={r}, R={spec.R}")
    ratio = (r / spec.R) ** n if n is not None else None
    return AnnulusAverage(average_single(g, spec, settings, growth), ratio)


class SweepFlag:
    CONVERGED = "CONVERGED"
    DIVERGED = "DIVERGED"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class SweepResult:
    entries: tuple  # ((R, EY), ...)
    flag: str
    rel_tol: float
    divergence_bound: float


def whole_space_sweep(
    g,
    spec: BallSpec,
    R_grid: Sequence[float],
    settings=None,
    growth=None,
    rel_tol: float = 1e-6,
    divergence_bound: float = 1e12,
) -> SweepResult:
    """EY on balls of growing radius, probing the whole-space limit.

    CONVERGED when the last step is below ``rel_tol`` relative to the last
    value (absolute near zero); DIVERGED when the magnitude escapes
    ``divergence_bound`` or the steps keep growing across the whole grid;
    UNDETERMINED otherwise.
    """
    grid = [float(R) for R in R_grid]
    if not grid:
        raise DomainError("radius grid must be nonempty")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise DomainError("radius grid must be strictly increasing")
    values = [average_single(g, spec.with_radius(R), settings, growth) for R in grid]
    entries = tuple(zip(grid, values))
    flag = SweepFlag.UNDETERMINED
    if len(values) >= 2:
        diffs = [abs(b - a) for a, b in zip(values[:-1], values[1:])]
        scale = max(abs(values[-1]), 1.0)
        if diffs[-1] <= rel_tol * scale:
            flag = SweepFlag.CONVERGED
        elif abs(values[-1]) > divergence_bound:
            flag = SweepFlag.DIVERGED
        elif len(diffs) >= 2 and all(
            later >= earlier > 0.0 for earlier, later in zip(diffs[:-1], diffs[1:])
        ):
            flag = SweepFlag.DIVERGED
    return SweepResult(entries, flag, rel_tol, divergence_bound)
