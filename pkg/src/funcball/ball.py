"""Norm exponents and ball specifications.

The central objects of the package live here: the norm exponent p (kept as
an exact rational p0/q0 whenever possible, because the parity of p0 decides
whether the full ball or only its positive quadrant carries a sensible
uniform geometry) and the ball {x : integral of |x(t)|^p over [0,1] <= R^p}
it induces, together with its dimension-n sections
{(x_1,...,x_n) : sum |x_k|^p <= n R^p}.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .exceptions import ConfigurationError, DomainError


class Quadrant(enum.Enum):
    FULL = "full"
    POSITIVE = "positive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PExponent:
    """Norm exponent p >= 1, rational p0/q0 in lowest terms or a plain real.

    Even p0 makes x -> |x|^p an even function, so the whole sign-symmetric
    ball is admissible; every other exponent restricts the geometry to the
    positive quadrant.
    """

    p0: int | None = None
    q0: int | None = None
    real_value: float | None = None

    def __post_init__(self):
        if self.real_value is not None:
            if self.p0 is not None or self.q0 is not None:
                raise ConfigurationError("give either a rational or a real exponent, not both")
            if not self.real_value >= 1.0:
                raise DomainError(f"exponent must be >= 1, got {self.real_value}")
        else:
            if not (isinstance(self.p0, int) and isinstance(self.q0, int)):
                raise ConfigurationError("rational exponent needs integer p0, q0")
            if self.p0 <= 0 or self.q0 <= 0:
                raise DomainError("p0 and q0 must be positive")
            if math.gcd(self.p0, self.q0) != 1:
                raise ConfigurationError(f"{self.p0}/{self.q0} is not in lowest terms")
            if self.p0 < self.q0:
                raise DomainError(f"exponent {self.p0}/{self.q0} is < 1")

    @classmethod
    def rational(cls, p0: int, q0: int = 1) -> "PExponent":
        g = math.gcd(p0, q0)
        return cls(p0=p0 // g, q0=q0 // g)

    @classmethod
    def real(cls, value: float) -> "PExponent":
        return cls(real_value=float(value))

    @classmethod
    def parse(cls, text: str) -> "PExponent":
        """Parse "p0/q0" or a decimal literal (decimals become exact fractions)."""
        text = text.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return cls.rational(int(num), int(den))
            frac = Fraction(text)
            return cls.rational(frac.numerator, frac.denominator)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"cannot parse exponent {text!r}") from exc

    @property
    def value(self) -> float:
        if self.real_value is not None:
            return self.real_value
        return self.p0 / self.q0

    @property
    def is_even_numerator(self) -> bool:
        return self.real_value is None and self.p0 % 2 == 0

    def admits(self, quadrant: Quadrant) -> bool:
        if quadrant is Quadrant.FULL:
            return self.is_even_numerator
        return True

    def __str__(self):
        if self.real_value is not None:
            return repr(self.real_value)
        if self.q0 == 1:
            return str(self.p0)
        return f"{self.p0}/{self.q0}"


@dataclass(frozen=True)
class BallSpec:
    """The ball (or its positive quadrant) of radius R in the p-norm."""

    p: PExponent
    R: float = 1.0
    quadrant: Quadrant = Quadrant.FULL

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"radius must be positive, got {self.R}")
        if not self.p.admits(self.quadrant):
            raise ConfigurationError(
                f"quadrant {self.quadrant} needs an even-numerator exponent, got p={self.p}"
            )

    @property
    def is_full(self) -> bool:
        return self.quadrant is Quadrant.FULL

    def support_radius(self, n: int) -> float:
        """Largest attainable |x_k| in the dimension-n section."""
        return self.R * n ** (1.0 / self.p.value)

    def power_budget(self, n: int) -> float:
        """Right-hand side n*R^p of the section constraint."""
        return n * self.R ** self.p.value

    def with_radius(self, R: float) -> "BallSpec":
        return BallSpec(self.p, R, self.quadrant)


def ball(p, R: float = 1.0, quadrant: Quadrant | str | None = None) -> BallSpec:
    """Convenience constructor: ``ball(2)``, ``ball("3/2", R=2.0)``, ...

    The quadrant defaults to the widest admissible one (full for even
    numerators, positive otherwise).
    """
    if isinstance(p, PExponent):
        pe = p
    elif isinstance(p, str):
        pe = PExponent.parse(p)
    elif isinstance(p, int):
        pe = PExponent.rational(p)
    elif isinstance(p, float) and p.is_integer():
        pe = PExponent.rational(int(p))
    else:
        pe = PExponent.real(p)
    if quadrant is None:
        quad = Quadrant.FULL if pe.is_even_numerator else Quadrant.POSITIVE
    elif isinstance(quadrant, str):
        quad = Quadrant(quadrant.lower())
    else:
        quad = quadrant
    return BallSpec(pe, float(R), quad)
