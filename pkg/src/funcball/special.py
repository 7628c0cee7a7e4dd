"""Gamma-function helpers and density normalization constants.

Every closed form in the package funnels through Gamma(1/p) and ratios of
Gamma(1 + n/p); all of them are assembled in log space so that the
dimension n can reach 1e6 without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ball import BallSpec, PExponent, Quadrant
from .exceptions import ConfigurationError, DomainError

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma needs a positive argument, got {x}")
    return math.lgamma(x)


def stirling_log_gamma(s: float) -> float:
    """Leading Stirling approximation ln(sqrt(2 pi) s^(s-1/2) e^(-s)).

    Deliberately truncated before the 1/(12 s) correction; this is the form
    used to pass the finite-n density coefficients to their limits, and it
    serves only as a cross-check against :func:`log_gamma`.
    """
    if not s > 0:
        raise DomainError(f"stirling_log_gamma needs a positive argument, got {s}")
    return _HALF_LOG_TWO_PI + (s - 0.5) * math.log(s) - s


@dataclass(frozen=True)
class NormalizationConstant:
    """The reciprocal prefactor of the limiting coordinate density."""

    value: float
    p: PExponent
    R: float
    quadrant: Quadrant


def log_normalization_constant(p: PExponent, R: float, quadrant: Quadrant) -> float:
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    if not p.admits(quadrant):
        raise ConfigurationError(f"p={p} does not admit the {quadrant} quadrant")
    pv = p.value
    log_c = math.log(R) + log_gamma(1.0 / pv) + (1.0 / pv - 1.0) * math.log(pv)
    if quadrant is Quadrant.FULL:
        log_c += math.log(2.0)
    return log_c


def normalization_constant(p: PExponent, R: float, quadrant: Quadrant) -> NormalizationConstant:
    """2 R Gamma(1/p) p^(1/p-1) on the full ball, half that on the quadrant.

    The integral of exp(-|x|^p / (p R^p)) over the density support equals
    exactly this constant, so 1/value is the density prefactor.
    """
    return NormalizationConstant(
        value=math.exp(log_normalization_constant(p, R, quadrant)),
        p=p,
        R=R,
        quadrant=quadrant,
    )


def spec_normalization(spec: BallSpec) -> float:
    return normalization_constant(spec.p, spec.R, spec.quadrant).value
