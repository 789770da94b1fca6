"""Kullback-Leibler divergence KL(p_theta0 || m_lam) and its grid minimizer.

Exact closed forms for the Gaussian families via low-rank identities; Monte
Carlo over replicate datasets otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, DomainError
from .marginal import MarginalStrategy, log_marginal
from .models import RegressionParams
from .samplers import simulate


@dataclass
class KlProfile:
    lam_grid: list
    kl_values: np.ndarray
    stderrs: np.ndarray
    minimizer: object
    min_value: float
    ambiguous: bool = False
    candidates: list = field(default_factory=list)

    def to_csv(self, path):
        rows = np.column_stack([
            np.asarray([np.atleast_1d(v)[0] for v in self.lam_grid], float),
            self.kl_values,
            self.stderrs,
        ])
        np.savetxt(path, rows, delimiter=",", header="lambda,kl,stderr",
                   comments="")


def kl_exact_gaussian(family, theta0, lam, n: int) -> float:
    """Closed-form KL between p_theta0 and the lam-marginal (Gaussian cases)."""
    if family.id == "M1":
        lam = family.validate_hyperparam(lam, allow_boundary=True)
        s2 = family.sigma2
        t = float(theta0)
        r = n * lam / (s2 + n * lam)
        return 0.5 * (-r + n * t * t / (s2 + n * lam) + math.log1p(n * lam / s2))
    if family.id == "M2":
        return _kl_m2(family, theta0, lam)
    raise CapabilityError(f"{family.id}: exact Gaussian KL not available")


def _kl_m2(family, theta0, lam):
    """KL(N(X beta0, s2 I) || N(0, s2 I + X D X^t)) via d-dimensional identities.

    Requires the design: theta0 must be a RegressionParams carrying ``X`` set on
    the family call path, so this variant takes (theta0, data) packed as a pair.
    """
    theta0, data = theta0
    beta0 = theta0.beta if isinstance(theta0, RegressionParams) else np.asarray(theta0, float)
    tau2 = family.validate_hyperparam(lam, allow_boundary=True)
    X = data.X
    s2 = family.sigma2
    mu = X @ beta0
    active = np.flatnonzero(tau2 > 0)
    if active.size == 0:
        return 0.5 * float(mu @ mu) / s2
    Xa = X[:, active]
    Da = tau2[active]
    G = Xa.T @ Xa
    M = s2 * np.diag(1.0 / Da) + G
    Minv_G = np.linalg.solve(M, G)
    tr_term = -float(np.trace(Minv_G))
    b = Xa.T @ mu
    quad = (float(mu @ mu) - float(b @ np.linalg.solve(M, b))) / s2
    sign, logdet = np.linalg.slogdet(np.eye(active.size) + (G * Da[None, :]) / s2)
    if sign <= 0:
        raise DomainError("marginal covariance not positive definite")
    return 0.5 * (tr_term + quad + logdet)


def kl_monte_carlo(family, theta0, lam, n: int, reps: int, seed,
                   strategy: MarginalStrategy | None = None):
    """Monte Carlo KL: mean of log p_theta0(Y) - log m_lam(Y) over replicates.

    Returns (estimate, std_error); the standard error is NaN when reps == 1.
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if strategy is None:
        strategy = MarginalStrategy(kind="closed-form")
    vals = np.empty(reps)
    for r in range(reps):
        data = simulate(family, theta0, n, seed=(seed, "kl-rep", r))
        ll = family.log_likelihood(theta0, data)
        lm = log_marginal(family, lam, data, strategy)
        if isinstance(lm, tuple):
            lm = lm[0]
        vals[r] = ll - lm
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return est, se


def kl_minimizer(family, theta0, n: int, lam_grid, strategy="exact",
                 reps: int = 200, seed=0) -> KlProfile:
    """KL profile over a hyperparameter grid with its minimizer.

    ``strategy`` is "exact" (closed-form Gaussian KL) or "monte-carlo".  With
    noisy values, grid points whose confidence band overlaps the minimum leave
    the minimizer ambiguous; the candidate interval is then reported.
    """
    lam_grid = list(lam_grid)
    if not lam_grid:
        raise DomainError("empty grid")
    vals = np.empty(len(lam_grid))
    ses = np.zeros(len(lam_grid))
    for i, lam in enumerate(lam_grid):
        if strategy == "exact":
            vals[i] = kl_exact_gaussian(family, theta0, lam, n)
        elif strategy == "monte-carlo":
            vals[i], ses[i] = kl_monte_carlo(family, theta0, lam, n, reps, seed)
        else:
            raise DomainError(f"unknown KL strategy {strategy!r}")
    imin = int(np.argmin(vals))
    ambiguous = False
    candidates = []
    if strategy == "monte-carlo":
        hi_min = vals[imin] + 3.0 * ses[imin]
        for i in range(len(lam_grid)):
            if i != imin and vals[i] - 3.0 * ses[i] <= hi_min:
                candidates.append(lam_grid[i])
        ambiguous = bool(candidates)
        if ambiguous:
            candidates.append(lam_grid[imin])
    return KlProfile(
        lam_grid=lam_grid, kl_values=vals, stderrs=ses,
        minimizer=lam_grid[imin], min_value=float(vals[imin]),
        ambiguous=ambiguous, candidates=sorted(candidates),
    )
