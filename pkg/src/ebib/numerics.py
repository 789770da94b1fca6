"""Shared numerical kernels: quadrature, special functions, small dense
Gaussian linear algebra and finite differences.

All routines are pure functions; nothing here holds mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import AccuracyError, DomainError

_SCHEMES = ("adaptive-simpson", "gauss-hermite", "trapezoid-grid")


@dataclass(frozen=True)
class QuadratureSpec:
    """Configuration for 1-D quadrature.

    ``abs_tol``/``max_depth`` drive adaptive Simpson; ``grid_points`` is the
    Gauss-Hermite order or the trapezoid grid size.
    """

    scheme: str = "adaptive-simpson"
    abs_tol: float = 1e-9
    max_depth: int = 40
    grid_points: int = 64

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.grid_points < 16:
            raise DomainError("grid_points must be >= 16")
        if self.max_depth < 4:
            raise DomainError("max_depth must be >= 4")


DEFAULT_QUAD = QuadratureSpec()


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, b, fb, m, fm, whole, tol, depth):
    """Returns (estimate, converged); the caller raises on failure so the
    exception can carry the best estimate of the full integral."""
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0, True
    if depth <= 0:
        return left + right + err / 15.0, False
    lv, lok = _adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
    rv, rok = _adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    return lv + rv, lok and rok


def integrate(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integral of f over [a, b].

    Infinite endpoints are allowed only with the gauss-hermite scheme, which
    evaluates sum_i w_i e^{x_i^2} f(x_i) (the Gaussian weight is factored back
    in, so ``f`` is the plain integrand).
    """
    if spec.scheme == "gauss-hermite":
        nodes, weights = np.polynomial.hermite.hermgauss(spec.grid_points)
        vals = np.array([f(x) for x in nodes])
        return float(np.sum(weights * np.exp(nodes**2) * vals))
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("infinite endpoints require the gauss-hermite scheme")
    if not a < b:
        raise DomainError("integrate requires a < b")
    if spec.scheme == "trapezoid-grid":
        xs = np.linspace(a, b, spec.grid_points)
        ys = np.array([f(x) for x in xs])
        return float(np.trapezoid(ys, xs))
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    val, ok = _adaptive(f, a, fa, b, fb, m, fm, whole, spec.abs_tol, spec.max_depth)
    if not ok:
        raise AccuracyError(
            "adaptive Simpson: max_depth exhausted before reaching abs_tol",
            estimate=val,
        )
    return val


def low_rank_gaussian_logpdf(y, mean, sigma2: float, lam: float) -> float:
    """Log-density of N(mean, sigma2*I + lam*11^t) at y.

    Uses the rank-one determinant lemma and Sherman-Morrison, so the cost is
    O(n) instead of O(n^3).
    """
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    y = np.asarray(y, dtype=float)
    r = y - np.asarray(mean, dtype=float)
    n = r.size
    s = float(np.sum(r))
    quad = (float(r @ r) - lam * s * s / (sigma2 + n * lam)) / sigma2
    logdet = n * math.log(sigma2) + math.log1p(n * lam / sigma2)
    return -0.5 * (n * math.log(2.0 * math.pi) + logdet + quad)


def gaussian_logpdf(y, mean, cov) -> float:
    """Dense multivariate Gaussian log-density via Cholesky."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    r = y - np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance matrix is not positive definite") from exc
    z = solve_triangular(chol, r, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (r.size * math.log(2.0 * math.pi) + logdet + float(z @ z))


def finite_diff_gradient(f, x, h: float = 1e-5):
    """Central-difference gradient of a scalar function on R^d."""
    if not h > 0:
        raise DomainError("h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad


def finite_diff_hessian(f, x, h: float = 1e-4):
    """Central-difference Hessian of a scalar function on R^d."""
    x = np.asarray(x, dtype=float)
    d = x.size
    hess = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h**2)
    return hess
