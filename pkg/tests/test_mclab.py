import math

import numpy as np
import pytest

from funcball.averages import BlockScheme, FunctionalSpec, average_blocks
from funcball.ball import ball
from funcball.exceptions import ConfigurationError, DomainError
from funcball.mclab import (
    PiecewisePath,
    block_weights,
    fit_decay_exponent,
    interval_index_slice,
    kernel_limit_report,
    mc_annulus,
    mc_block_scheme,
    mc_exchange_gap,
    mc_functional_average,
    mc_general_functional,
    mc_variance_decay,
    path_max,
    path_max_batch,
    path_mean_square,
    path_mean_square_batch,
    smallest_valid_n,
    time_grid,
)
from funcball.sampler import SeedSpec

SPEC2 = ball(2)
SQUARE = FunctionalSpec.univariate(lambda x: x * x)
QUARTIC = FunctionalSpec.univariate(lambda x: x**4)


# Exact laws of Y_n = (1/n) sum g(x_k) under the uniform section, p = 2, R = 1.
# For g = x^2 the statistic is radial: Y_n ~ Beta(n/2, 1).
def exact_mean_square(n):
    return n / (n + 2)


def exact_var_square(n):
    return 4.0 * n / ((n + 4.0) * (n + 2.0) ** 2)


def exact_mean_quartic(n):
    # E x_1^4 = 3 n^2 / ((n+2)(n+4)) from the Beta(1/2, (n+1)/2) marginal
    return 3.0 * n * n / ((n + 2.0) * (n + 4.0))


# ----------------------------------------------------------- index mapping


def test_time_grid_and_slices():
    np.testing.assert_allclose(time_grid(4), [0.25, 0.5, 0.75, 1.0])
    assert interval_index_slice((0.0, 1.0), 10) == slice(0, 10)
    assert interval_index_slice((0.0, 0.5), 10) == slice(0, 5)
    assert interval_index_slice((0.25, 0.75), 8) == slice(2, 6)


# ------------------------------------------------------------- plain MC


def test_constant_functional_exact():
    functional = FunctionalSpec.univariate(lambda x: np.ones_like(x))
    est = mc_functional_average(functional, 32, SPEC2, 500, 1)
    assert est.mean == pytest.approx(1.0, abs=1e-15)
    assert est.variance == 0.0
    assert est.stderr == 0.0


def test_dimension_one_matches_uniform_law():
    est = mc_functional_average(SQUARE, 1, SPEC2, 10**4, 11)
    # Y_1 = x^2 with x uniform on [-1, 1]: mean 1/3 (no discretization bias at n=1)
    assert abs(est.mean - 1.0 / 3.0) < 3.0 * est.stderr


def test_mean_matches_exact_finite_n_law():
    n = 256
    est = mc_functional_average(SQUARE, n, SPEC2, 10**4, 12)
    assert abs(est.mean - exact_mean_square(n)) < 4.0 * est.stderr
    assert est.variance == pytest.approx(exact_var_square(n), rel=0.15)
    # the n -> infinity closed form is approached only at O(1/n)
    assert abs(est.mean - 1.0) < 0.01


def test_agreement_budget_across_seeds():
    # estimator vs its own exact law: ~95% of independent seeds within 3 stderr
    n, hits = 64, 0
    for seed in range(20):
        est = mc_functional_average(SQUARE, n, SPEC2, 4000, seed)
        if abs(est.mean - exact_mean_square(n)) < 3.0 * est.stderr:
            hits += 1
    assert hits >= 17


def test_subinterval_functional():
    functional = FunctionalSpec.univariate(lambda x: x * x, (0.0, 0.5))
    est = mc_functional_average(functional, 64, SPEC2, 10**4, 13)
    # half the indices contribute: E Y_n = (32/64) * exact mean
    assert abs(est.mean - 0.5 * exact_mean_square(64)) < 4.0 * est.stderr


def test_time_weighted_functional():
    functional = FunctionalSpec(
        g=lambda x: x * x, m=1, intervals=((0.0, 1.0),), time_weight=lambda t: t
    )
    n = 64
    est = mc_functional_average(functional, n, SPEC2, 10**4, 15)
    # E Y_n = E[x^2] * (1/n) sum k/n = (n/(n+2)) * (n+1)/(2n)
    truth = exact_mean_square(n) * (n + 1.0) / (2.0 * n)
    assert abs(est.mean - truth) < 4.0 * est.stderr


def test_bivariate_functional():
    functional = FunctionalSpec(
        g=lambda x, y: x * x * y * y, m=2, intervals=((0.0, 1.0), (0.0, 1.0))
    )
    est = mc_functional_average(functional, 24, SPEC2, 2000, 14)
    # E[(1/n^2) sum x_i^2 x_j^2] = E[(Y_n)^2] = n/(n+4) for the radial square
    assert abs(est.mean - 24.0 / 28.0) < 4.0 * est.stderr


def test_requires_n_at_least_m():
    functional = FunctionalSpec(g=lambda x, y: x * y, m=2, intervals=((0, 1), (0, 1)))
    with pytest.raises(DomainError):
        mc_functional_average(functional, 1, SPEC2, 10, 0)


def test_determinism_and_thread_independence():
    a = mc_functional_average(SQUARE, 32, SPEC2, 20000, SeedSpec(7, 3))
    b = mc_functional_average(SQUARE, 32, SPEC2, 20000, SeedSpec(7, 3))
    c = mc_functional_average(SQUARE, 32, SPEC2, 20000, SeedSpec(7, 3), threads=4)
    assert a == b
    assert a == c
    d = mc_functional_average(SQUARE, 32, SPEC2, 20000, SeedSpec(7, 4))
    assert d.mean != a.mean


# -------------------------------------------------------------- decay


def test_variance_decay_radial_square():
    record = mc_variance_decay(SQUARE, [100, 200, 400], SPEC2, 10**4, 21)
    variances = [est.variance for _, est in record.entries]
    assert variances[0] > variances[1] > variances[2]
    for (n, _), v in zip(record.entries, variances):
        assert v == pytest.approx(exact_var_square(n), rel=0.2)
    # g and the norm align (Y_n is radial): variance decays at the 1/n^2 rate
    assert -2.3 < record.decay_exponent < -1.7
    assert record.target == pytest.approx(1.0, abs=1e-9)


def test_variance_decay_generic_integrand_clt_rate():
    record = mc_variance_decay(QUARTIC, [100, 200, 400], SPEC2, 10**4, 22)
    # generic g: conditional fluctuations on the sphere dominate, c/n law
    assert -1.3 < record.decay_exponent < -0.7
    assert record.target == pytest.approx(3.0, abs=1e-8)
    scaled = [n * est.variance for n, est in record.entries]
    assert max(scaled) / min(scaled) < 2.0


def test_variance_decay_constant():
    functional = FunctionalSpec.univariate(lambda x: np.ones_like(x))
    record = mc_variance_decay(functional, [10, 20], SPEC2, 100, 23)
    assert all(est.variance == 0.0 for _, est in record.entries)
    assert math.isnan(record.decay_exponent)


def test_fit_decay_exponent_exact_power_law():
    ns = [100, 200, 400]
    assert fit_decay_exponent(ns, [1.0 / n for n in ns]) == pytest.approx(-1.0, abs=1e-12)


# -------------------------------------------------------------- blocks


def test_block_weights_and_validation():
    scheme = BlockScheme(((0.5, 0.5), (0.5, 1.5)))
    dt = block_weights(scheme, 4)
    np.testing.assert_allclose(dt, [0.125, 0.125, 0.375, 0.375])
    assert math.fsum(dt) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError) as err:
        block_weights(scheme, 5)
    assert "smallest valid n is 2" in str(err.value)
    assert smallest_valid_n(BlockScheme(((0.25, 2.0), (0.75, 2.0 / 3.0)))) == 4


def test_uniform_block_scheme_matches_plain():
    est_blocks = mc_block_scheme(SQUARE, BlockScheme(((1.0, 1.0),)), 64, SPEC2, 10**4, 31)
    est_plain = mc_functional_average(SQUARE, 64, SPEC2, 10**4, 32)
    combined = math.hypot(est_blocks.stderr, est_plain.stderr)
    assert abs(est_blocks.mean - est_plain.mean) < 4.0 * combined


def test_block_scheme_shifts_quartic_average():
    scheme = BlockScheme(((0.5, 0.5), (0.5, 1.5)))
    n = 400
    blocked = mc_block_scheme(QUARTIC, scheme, n, SPEC2, 10**4, 33)
    uniform = mc_functional_average(QUARTIC, n, SPEC2, 10**4, 34)
    # exact finite-n oracle: E sum x_k^4 / dt_k^{-1}... = 4 n^2 / ((n+2)(n+4))
    blocked_truth = 4.0 * n * n / ((n + 2.0) * (n + 4.0))
    assert abs(blocked.mean - blocked_truth) < 4.0 * blocked.stderr
    combined = math.hypot(blocked.stderr, uniform.stderr)
    assert (blocked.mean - uniform.mean) / combined > 5.0
    assert uniform.mean == pytest.approx(exact_mean_quartic(n), abs=4.0 * uniform.stderr)


def test_block_scheme_quadratic_invariance():
    scheme = BlockScheme(((0.5, 0.5), (0.5, 1.5)))
    blocked = mc_block_scheme(SQUARE, scheme, 400, SPEC2, 10**4, 35)
    uniform = mc_functional_average(SQUARE, 400, SPEC2, 10**4, 36)
    combined = math.hypot(blocked.stderr, uniform.stderr)
    assert abs(blocked.mean - uniform.mean) < 3.0 * combined


def test_block_scheme_p4_consistency():
    # cross-p check of the weighted sampler against the closed form; the
    # oracle for E|x|^2 under exp(-x^4/4) is 2 Gamma(3/4)/Gamma(1/4)
    spec4 = ball(4)
    scheme = BlockScheme(((0.5, 0.5), (0.5, 1.5)))
    closed = average_blocks(lambda x: x * x, scheme, spec4)
    factor = 0.25 * 0.5**-0.5 + 0.75 * 1.5**-0.5
    oracle = factor * 2.0 * math.gamma(0.75) / math.gamma(0.25)
    assert closed == pytest.approx(oracle, rel=1e-10)
    est = mc_block_scheme(SQUARE, scheme, 400, spec4, 10**4, 71)
    # discretization bias is O(1/n); 0.01 covers it plus the noise at 1e4 samples
    assert abs(est.mean - closed) < 0.01


def test_block_scheme_requires_full_univariate():
    partial = FunctionalSpec.univariate(lambda x: x, (0.0, 0.5))
    with pytest.raises(ConfigurationError):
        mc_block_scheme(partial, BlockScheme(((1.0, 1.0),)), 8, SPEC2, 10, 0)


# ------------------------------------------------------------- exchange


def test_exchange_identity_gap_is_discretization_bias():
    rows = mc_exchange_gap(lambda y: y, SQUARE, [100, 400], SPEC2, 10**4, 41)
    for row in rows:
        bias = 2.0 / (row.n + 2.0)
        assert row.gap == pytest.approx(bias, abs=4.0 * row.stderr)


def test_exchange_square_gap_shrinks():
    rows = mc_exchange_gap(lambda y: y * y, SQUARE, [25, 400], SPEC2, 10**4, 42)
    assert rows[1].gap < rows[0].gap
    # oracle E[Y_n^2] = n/(n+4): gap approaches 4/(n+4)
    assert rows[1].gap == pytest.approx(4.0 / 404.0, abs=4.0 * rows[1].stderr)


def test_exchange_exp_of_odd_integrand():
    functional = FunctionalSpec.univariate(lambda x: x)
    rows = mc_exchange_gap(np.exp, functional, [25, 400], SPEC2, 10**4, 43)
    assert rows[1].gap < rows[0].gap
    assert rows[1].gap < 0.01


# -------------------------------------------------------------- annulus


def test_annulus_zero_inner_radius_identical():
    annulus, ball_est, ratio = mc_annulus(lambda x: x * x, 0.0, SPEC2, 16, 5000, 51)
    assert annulus == ball_est
    assert ratio == 0.0


def test_annulus_agrees_with_ball():
    annulus, ball_est, ratio = mc_annulus(lambda x: x * x, 0.9, SPEC2, 200, 10**4, 52)
    combined = math.hypot(annulus.stderr, ball_est.stderr)
    assert abs(annulus.mean - ball_est.mean) <= 3.0 * max(combined, 1e-15)
    assert ratio == pytest.approx(0.9**200, rel=1e-12)
    # expected rejections over the whole run: samples * ratio << 1
    assert 10**4 * ratio < 1.0


def test_annulus_validation():
    with pytest.raises(DomainError):
        mc_annulus(lambda x: x, 1.5, SPEC2, 8, 10, 0)


# ------------------------------------------------------- path functionals


def test_piecewise_path_basics():
    path = PiecewisePath(np.array([1.0, 2.0, 0.0]))
    assert path.n == 3
    np.testing.assert_allclose(path.knots, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
    assert path(0.0) == 1.0  # left endpoint repeats the first coordinate
    assert path(0.5) == 1.5  # halfway between the knots at 1.0 and 2.0
    assert path.max() == 2.0
    # segment-exact square integral vs a fine trapezoid oracle
    t = np.linspace(0.0, 1.0, 100001)
    oracle = np.trapezoid(path(t) ** 2, t)
    assert path.mean_square() == pytest.approx(oracle, rel=1e-8)


def test_path_mean_square_expectation():
    n = 256
    est = mc_general_functional(
        path_mean_square, n, SPEC2, 10**4, 61, batch_f=path_mean_square_batch
    )
    # oracle: E int path^2 = e (2n+1) / (3n) with e = n/(n+2); the linear
    # interpolant of (asymptotically independent) knots dips between them,
    # so the limit is 2/3 of the coordinate second moment, not 1
    e = exact_mean_square(n)
    truth = e * (2.0 * n + 1.0) / (3.0 * n)
    assert abs(est.mean - truth) < 4.0 * est.stderr
    assert est.mean == pytest.approx(2.0 / 3.0, abs=0.01)


def test_path_loop_matches_batch():
    loop = mc_general_functional(path_mean_square, 32, SPEC2, 300, 62)
    batch = mc_general_functional(
        path_mean_square, 32, SPEC2, 300, 62, batch_f=path_mean_square_batch
    )
    assert loop.mean == pytest.approx(batch.mean, rel=1e-12)


def test_path_midpoint_symmetric():
    est = mc_general_functional(lambda path: path(0.5), 64, SPEC2, 10**4, 63)
    assert abs(est.mean) < 3.0 * est.stderr


def test_path_max_monotone_in_radius():
    small = mc_general_functional(
        path_max, 64, ball(2, R=1.0), 4000, 64, batch_f=path_max_batch
    )
    large = mc_general_functional(
        path_max, 64, ball(2, R=2.0), 4000, 64, batch_f=path_max_batch
    )
    assert large.mean > small.mean
    # points of the R=2 ball are 2x the points of the R=1 ball in law
    assert large.mean == pytest.approx(2.0 * small.mean, rel=1e-12)


# ---------------------------------------------------------- kernel report


def test_kernel_report_flat_p2():
    rows = kernel_limit_report(lambda x: 1.0, ball(2).p, 0, [10, 100, 1000], growth=(1, 0))
    values = [row.kernel_value for row in rows]
    assert values[0] == pytest.approx(5.0 / 3.0, rel=1e-10)
    assert values[1] == pytest.approx(200.0 / 102.0, rel=1e-10)
    assert values[2] == pytest.approx(2000.0 / 1002.0, rel=1e-10)
    assert rows[0].limit_value == pytest.approx(2.0, rel=1e-10)
    gaps = [row.gap for row in rows]
    assert gaps[0] > gaps[1] > gaps[2]


def test_kernel_report_linear_p1():
    rows = kernel_limit_report(lambda x: x, ball(1).p, 0, [100], growth=(1, 1))
    assert rows[0].limit_value == pytest.approx(1.0, rel=1e-10)


def test_kernel_report_shift_insensitive():
    flat = lambda x: 1.0  # noqa: E731
    base = kernel_limit_report(flat, ball(2).p, 0, [1000], growth=(1, 0))[0]
    shifted = kernel_limit_report(flat, ball(2).p, 5, [1000], growth=(1, 0))[0]
    assert abs(shifted.gap - base.gap) < 1e-2
