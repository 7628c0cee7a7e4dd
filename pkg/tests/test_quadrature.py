import math

import pytest

from funcball.ball import PExponent, Quadrant
from funcball.exceptions import ConfigurationError, DomainError
from funcball.expr import UNBOUNDED
from funcball.quadrature import (
    QuadratureSettings,
    kernel_integral_finite_n,
    kernel_limit_integral,
    weighted_integral_1d,
    weighted_integral_nd,
)

P1 = PExponent.rational(1)
P2 = PExponent.rational(2)
P4 = PExponent.rational(4)

SQRT_TWO_PI = 2.50662827463100050241576528481


def absolute_moment(a: float, p: float, full: bool) -> float:
    """Closed form int |x|^a exp(-x^p/p) dx = p^((a+1)/p - 1) Gamma((a+1)/p)."""
    half = p ** ((a + 1.0) / p - 1.0) * math.gamma((a + 1.0) / p)
    return 2.0 * half if full else half


def test_weight_mass_full_p2():
    est = weighted_integral_1d(lambda x: 1.0, P2, Quadrant.FULL)
    assert est.value == pytest.approx(SQRT_TWO_PI, rel=1e-12)
    assert est.method == "adaptive"


def test_second_moment_p2():
    est = weighted_integral_1d(lambda x: x * x, P2, Quadrant.FULL)
    assert est.value == pytest.approx(SQRT_TWO_PI, rel=1e-12)


def test_exponential_mass_positive_p1():
    est = weighted_integral_1d(lambda x: 1.0, P1, Quadrant.POSITIVE)
    assert est.value == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("p", [P1, P2, P4, PExponent.parse("3/2")])
@pytest.mark.parametrize("a", [0, 1, 2, 4, 6])
@pytest.mark.parametrize("full", [True, False])
def test_moment_tolerance_contract(p, a, full):
    if full and not p.is_even_numerator:
        pytest.skip("full domain needs an even numerator")
    domain = Quadrant.FULL if full else Quadrant.POSITIVE
    truth = absolute_moment(float(a), p.value, full)
    settings = QuadratureSettings()
    est = weighted_integral_1d(lambda x: abs(x) ** a, p, domain, settings)
    assert abs(est.value - truth) <= max(settings.abs_tol, settings.rel_tol * abs(truth))


def test_odd_integrand_vanishes():
    settings = QuadratureSettings()
    for f in (lambda x: x, lambda x: x**3, lambda x: x * math.cos(x)):
        est = weighted_integral_1d(f, P2, Quadrant.FULL, settings)
        assert abs(est.value) < settings.abs_tol


def test_sharply_scaled_integrand():
    # integrand varying on the 1e-12 z-scale: the graded mesh must catch it
    R = 1e6
    est = weighted_integral_1d(lambda x: 1.0 / (1.0 + (R * x) ** 2), P2, Quadrant.FULL)
    # oracle: E[1/(1+R^2 Z^2)] * sqrt(2 pi) ~ pi/R for large R
    assert est.value == pytest.approx(math.pi / R, rel=1e-3)


def test_unbounded_growth_rejected():
    with pytest.raises(ConfigurationError):
        weighted_integral_1d(lambda x: math.exp(x), P2, Quadrant.FULL, growth=UNBOUNDED)


def test_manual_growth_certificate():
    est = weighted_integral_1d(
        lambda x: math.exp(x), P2, Quadrant.FULL, growth=(math.exp(40.0), 1.0)
    )
    # oracle: int exp(x) exp(-x^2/2) = sqrt(2 pi) exp(1/2)
    assert est.value == pytest.approx(SQRT_TWO_PI * math.exp(0.5), rel=1e-10)


# ------------------------------------------------------------------- nd


def test_nd_m1_delegates():
    a = weighted_integral_nd(lambda x: x * x, 1, P2, Quadrant.FULL)
    b = weighted_integral_1d(lambda x: x * x, P2, Quadrant.FULL)
    assert a.value == b.value


def test_nd_odd_product_vanishes():
    est = weighted_integral_nd(lambda x, y: x * y, 2, P2, Quadrant.FULL)
    assert abs(est.value) < 1e-9


def test_nd_square_product():
    est = weighted_integral_nd(lambda x, y: x * x * y * y, 2, P2, Quadrant.FULL)
    assert est.value == pytest.approx(2.0 * math.pi, rel=1e-9)


def test_nd_positive_p1():
    est = weighted_integral_nd(lambda x, y: x * y, 2, P1, Quadrant.POSITIVE)
    assert est.value == pytest.approx(1.0, rel=1e-9)


def test_nd_three_dimensional():
    est = weighted_integral_nd(
        lambda x, y, z: x * x + y * y + z * z, 3, P2, Quadrant.FULL
    )
    # oracle: 3 * E Z^2 * mass^3 = 3 sqrt(2 pi)^3
    assert est.value == pytest.approx(3.0 * SQRT_TWO_PI**3, rel=1e-7)


def test_nd_montecarlo_path():
    est = weighted_integral_nd(lambda *xs: 1.0, 4, P2, Quadrant.FULL, mc_samples=20000)
    assert est.method == "montecarlo"
    # constant integrand: exact value, zero stochastic error
    assert est.value == pytest.approx(SQRT_TWO_PI**4, rel=1e-12)
    assert est.error == 0.0
    est = weighted_integral_nd(
        lambda x1, x2, x3, x4: x1 * x1, 4, P2, Quadrant.FULL, mc_samples=20000
    )
    assert est.error > 0.0
    assert est.value == pytest.approx(SQRT_TWO_PI**4, abs=5.0 * est.error)


# --------------------------------------------------------------- kernels


def test_kernel_closed_form_flat():
    est = kernel_integral_finite_n(lambda x: 1.0, 10, 0, P2)
    assert est.value == pytest.approx(10.0 * 2.0 / 12.0, rel=1e-12)


def test_kernel_closed_form_linear():
    # int_0^n x (1 - x/n)^n dx = n^2 / ((n+1)(n+2))
    est = kernel_integral_finite_n(lambda x: x, 100, 0, P1)
    assert est.value == pytest.approx(10000.0 / (101.0 * 102.0), rel=1e-12)


def test_kernel_flat_converges_to_two():
    gaps = []
    for n in (10**2, 10**3, 10**4):
        est = kernel_integral_finite_n(lambda x: 1.0, n, 0, P2)
        gaps.append(abs(est.value - 2.0))
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.mark.parametrize("p", [P1, P2])
@pytest.mark.parametrize("f,growth", [(lambda x: 1.0, (1, 0)), (lambda x: x, (1, 1)), (lambda x: x * x, (1, 2))])
def test_kernel_convergence_invariant(p, f, growth):
    limit = kernel_limit_integral(f, p, growth=growth).value
    gaps = [
        abs(kernel_integral_finite_n(f, n, 0, p).value - limit)
        for n in (10, 100, 1000)
    ]
    assert gaps[0] > gaps[1] > gaps[2]


def test_kernel_limit_values():
    # int_0^inf exp(-x/2) = 2; int_0^inf x exp(-x) = 1
    assert kernel_limit_integral(lambda x: 1.0, P2).value == pytest.approx(2.0, rel=1e-12)
    assert kernel_limit_integral(lambda x: x, P1).value == pytest.approx(1.0, rel=1e-12)


def test_kernel_domain_error():
    with pytest.raises(DomainError):
        kernel_integral_finite_n(lambda x: 1.0, 5, 5, P2)


def test_settings_validation():
    with pytest.raises(ConfigurationError):
        QuadratureSettings(abs_tol=0.0)
