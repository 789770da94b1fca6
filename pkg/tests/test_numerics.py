import math

import mpmath
import numpy as np
import pytest

from ebib.errors import AccuracyError, DomainError
from ebib.numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    finite_diff_gradient,
    gaussian_logpdf,
    integrate,
    log_gamma,
    low_rank_gaussian_logpdf,
)


def test_log_gamma_against_high_precision_oracle():
    assert log_gamma(7.3) == pytest.approx(float(mpmath.loggamma(7.3)), abs=1e-12)


def test_log_gamma_log_grid_against_oracle():
    for x in np.geomspace(1e-3, 1e3, 60):
        want = float(mpmath.loggamma(x))
        assert log_gamma(float(x)) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_log_gamma_recurrence():
    for x in np.geomspace(1e-3, 1e3, 40):
        lhs = log_gamma(float(x) + 1.0)
        rhs = log_gamma(float(x)) + math.log(x)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-10)


def test_log_gamma_domain():
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.5)


def test_integrate_unit_constant():
    assert integrate(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_linearity_on_random_polynomials():
    g = np.random.default_rng(7)
    for _ in range(10):
        c1 = g.normal(size=4)
        c2 = g.normal(size=4)
        a, b = sorted(g.uniform(-2, 2, size=2))
        if b - a < 0.1:
            b = a + 0.5
        f1 = lambda x: float(np.polyval(c1, x))
        f2 = lambda x: float(np.polyval(c2, x))
        al, be = g.normal(size=2)
        combo = integrate(lambda x: al * f1(x) + be * f2(x), a, b)
        parts = al * integrate(f1, a, b) + be * integrate(f2, a, b)
        assert combo == pytest.approx(parts, abs=2 * DEFAULT_QUAD.abs_tol)


def test_integrate_absolute_moment_sqrt_two_over_pi():
    # E|Y - 2| for Y ~ N(2, 1) equals sqrt(2/pi)
    def f(y):
        return abs(y - 2.0) * math.exp(-0.5 * (y - 2.0) ** 2) / math.sqrt(2 * math.pi)

    val = integrate(f, -8.0, 12.0)
    assert val == pytest.approx(0.7978845608, abs=1e-8)
    # Monte Carlo oracle
    g = np.random.default_rng(3)
    mc = np.abs(g.normal(2.0, 1.0, size=400000) - 2.0).mean()
    assert abs(val - mc) < 0.005


def test_integrate_gauss_hermite_gaussian_mass():
    spec = QuadratureSpec(scheme="gauss-hermite", grid_points=64)
    val = integrate(lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi),
                    -math.inf, math.inf, spec)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_integrate_infinite_endpoints_rejected_for_simpson():
    with pytest.raises(DomainError):
        integrate(lambda x: x, 0.0, math.inf)


def test_integrate_max_depth_raises_accuracy_error_with_estimate():
    spec = QuadratureSpec(abs_tol=1e-15, max_depth=4)
    with pytest.raises(AccuracyError) as exc:
        integrate(lambda x: math.sqrt(abs(x)), -1.0, 1.0, spec)
    assert exc.value.estimate == pytest.approx(4.0 / 3.0, abs=0.05)


def test_quadrature_spec_invariants():
    with pytest.raises(DomainError):
        QuadratureSpec(scheme="midpoint")
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(grid_points=8)
    with pytest.raises(DomainError):
        QuadratureSpec(max_depth=2)


def test_low_rank_gaussian_two_point_case():
    # N_2(0, I + J) at y = (0, 0)
    cov = np.eye(2) + np.ones((2, 2))
    want = gaussian_logpdf([0.0, 0.0], [0.0, 0.0], cov)
    got = low_rank_gaussian_logpdf([0.0, 0.0], 0.0, 1.0, 1.0)
    assert got == pytest.approx(want, abs=1e-12)


def test_low_rank_gaussian_matches_dense_cholesky():
    g = np.random.default_rng(11)
    for n in (5, 17, 30, 50):
        y = g.normal(size=n)
        sigma2 = float(g.uniform(0.3, 3.0))
        lam = float(g.uniform(0.0, 5.0))
        cov = sigma2 * np.eye(n) + lam * np.ones((n, n))
        want = gaussian_logpdf(y, np.zeros(n), cov)
        got = low_rank_gaussian_logpdf(y, 0.0, sigma2, lam)
        assert got == pytest.approx(want, abs=1e-10)


def test_low_rank_gaussian_domain():
    with pytest.raises(DomainError):
        low_rank_gaussian_logpdf([0.0], 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        low_rank_gaussian_logpdf([0.0], 0.0, 1.0, -1.0)


def test_finite_diff_gradient_constant_is_zero():
    grad = finite_diff_gradient(lambda x: 3.5, np.array([1.0, -2.0, 0.3]))
    assert np.allclose(grad, 0.0, atol=1e-9)


def test_finite_diff_gradient_quadratic():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])

    def f(x):
        return 0.5 * float(x @ A @ x)

    x = np.array([0.7, -1.2])
    assert np.allclose(finite_diff_gradient(f, x), A @ x, atol=1e-7)
