"""Synthetic data generation and MCMC samplers.

All stochastic routines draw from hierarchical streams (see module rng), so a
(seed, role) pair fully determines the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import DomainError, SamplerError
from .models import Dataset, GPriorParams, MixtureParams, RegressionParams


@dataclass(frozen=True)
class GibbsConfig:
    iters: int = 6000
    burnin: int = 1000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.iters > self.burnin >= 0:
            raise DomainError("need iters > burnin >= 0")
        if self.thin < 1:
            raise DomainError("thin must be >= 1")


@dataclass(frozen=True, eq=False)
class ChainOutput:
    draws: np.ndarray  # rows = retained iterations
    names: tuple
    ess_per_param: np.ndarray
    seed: int

    def to_csv(self, path):
        header = ",".join(self.names)
        np.savetxt(path, self.draws, delimiter=",", header=header, comments="")


def effective_sample_size(x) -> float:
    """ESS via the initial-positive-sequence truncation of the autocorrelations."""
    x = np.asarray(x, dtype=float)
    n = x.size
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0:
        return float(n)
    # FFT autocovariances
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n].real / n
    rho = acov / var
    s = 0.0
    k = 1
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        s += pair
        k += 2
    return float(n / (1.0 + 2.0 * s))


def _chain(draws, names, seed) -> ChainOutput:
    draws = np.asarray(draws, dtype=float)
    if not np.all(np.isfinite(draws)):
        bad = int(np.argwhere(~np.isfinite(draws))[0][0])
        raise SamplerError("non-finite draw in chain", iteration=bad)
    ess = np.array([effective_sample_size(draws[:, j]) for j in range(draws.shape[1])])
    return ChainOutput(draws=draws, names=tuple(names), ess_per_param=ess, seed=seed)


# ---------------------------------------------------------------------------
# data simulation


def _flatten(key):
    if isinstance(key, tuple):
        return [k for part in key for k in _flatten(part)]
    return [key]


def _stream(seed, *roles):
    # seeds may be scalars or (nested) key tuples from a parent stream hierarchy
    return rngmod.stream(*_flatten(seed), *roles)


def uniform_design(n: int, d: int, seed, low: float = -10.0, high: float = 10.0):
    g = _stream(seed, "design")
    return g.uniform(low, high, size=(n, d))


def orthogonal_design(n: int, d: int, seed, scale: float = 1.0):
    """Design with exactly orthogonal columns, each of squared norm n*scale^2."""
    if d > n:
        raise DomainError("need n >= d for an orthogonal design")
    g = _stream(seed, "design")
    Q, _ = np.linalg.qr(g.normal(size=(n, d)))
    return Q * (scale * math.sqrt(n))


def simulate(family, theta0, n: int, seed) -> Dataset:
    """Synthetic dataset from p_theta0 for any of the seven families."""
    g = _stream(seed, "data")
    fid = family.id
    if n == 0:
        return Dataset(y=np.empty(0))
    if fid == "M1":
        y = g.normal(float(theta0), math.sqrt(family.sigma2), size=n)
        return Dataset(y=y)
    if fid in ("M2", "M5"):
        beta = theta0.beta if isinstance(theta0, RegressionParams) else np.asarray(theta0, float)
        s2 = getattr(family, "sigma2", None)
        if s2 is None:
            s2 = theta0.sigma2
        X = uniform_design(n, beta.size, seed)
        y = X @ beta + g.normal(0.0, math.sqrt(s2), size=n)
        return Dataset(y=y, X=X)
    if fid == "M3":
        t: GPriorParams = theta0
        X = uniform_design(n, t.beta.size, seed)
        X = X - X.mean(axis=0)  # the g-prior family requires 1^t X = 0
        y = t.alpha + X @ t.beta + g.normal(0.0, t.sigma, size=n)
        return Dataset(y=y, X=X)
    if fid == "M4":
        P = np.atleast_2d(np.asarray(theta0, float))
        K = P.shape[0]
        path = np.empty(n + 1, dtype=np.int64)
        path[0] = g.integers(K)
        for t_ in range(n):
            path[t_ + 1] = g.choice(K, p=P[path[t_]])
        counts = np.zeros((K, K), dtype=np.int64)
        np.add.at(counts, (path[:-1], path[1:]), 1)
        return Dataset(y=path.astype(float), counts=counts)
    if fid in ("M6", "M7"):
        t: MixtureParams = theta0
        z = g.choice(t.k, size=n, p=t.weights)
        y = t.means[z] + g.normal(size=n) * np.sqrt(t.variances[z])
        return Dataset(y=y)
    raise DomainError(f"unknown family id {fid!r}")


# ---------------------------------------------------------------------------
# Bayesian LASSO Gibbs (scale mixture of normals)


def gibbs_lasso(data: Dataset, lam: float, sigma2: float | None,
                cfg: GibbsConfig) -> ChainOutput:
    """Gibbs sampler for the Laplace-prior regression.

    Draws (beta, tau2) with sigma2 fixed when given, else also sigma2 under the
    improper 1/sigma2 prior.  The Laplace prior is represented as a scale
    mixture: beta_j | tau_j2, sigma2 ~ N(0, sigma2 tau_j2) with
    tau_j2 ~ Exp(lam^2 / 2).
    """
    if lam <= 0:
        raise DomainError("lam must be positive")
    X, y = data.X, data.y
    n, d = X.shape
    if d >= n:
        raise DomainError("need d < n")
    sample_sigma = sigma2 is None
    g = rngmod.stream(cfg.seed, "gibbs-lasso")

    XtX = X.T @ X
    Xty = X.T @ y
    beta = np.linalg.solve(XtX + 1e-8 * np.eye(d), Xty)
    # near-null OLS coordinates start with a small but nonzero prior scale
    tau2 = np.maximum(beta**2, 1e-6)
    s2 = sigma2 if not sample_sigma else max(float(np.sum((y - X @ beta) ** 2)) / n, 1e-8)

    keep = (cfg.iters - cfg.burnin) // cfg.thin
    ncol = 2 * d + (1 if sample_sigma else 0)
    out = np.empty((keep, ncol))
    names = [f"beta{j + 1}" for j in range(d)] + [f"tau2_{j + 1}" for j in range(d)]
    if sample_sigma:
        names.append("sigma2")

    row = 0
    for it in range(cfg.iters):
        A = XtX + np.diag(1.0 / tau2)
        chol = np.linalg.cholesky(A)
        mean = np.linalg.solve(chol.T, np.linalg.solve(chol, Xty))
        z = g.normal(size=d)
        beta = mean + math.sqrt(s2) * np.linalg.solve(chol.T, z)

        absb = np.maximum(np.abs(beta), 1e-12)
        inv_tau2 = g.wald(lam * math.sqrt(s2) / absb, lam**2)
        tau2 = 1.0 / np.maximum(inv_tau2, 1e-300)

        if sample_sigma:
            rss = float(np.sum((y - X @ beta) ** 2))
            shape = (n - 1.0 + d) / 2.0
            scale = (rss + float(beta @ (beta / tau2))) / 2.0
            s2 = scale / g.gamma(shape)

        if it >= cfg.burnin and (it - cfg.burnin) % cfg.thin == 0:
            vals = np.concatenate([beta, tau2, [s2] if sample_sigma else []])
            out[row] = vals
            row += 1
    return _chain(out[:row], names, cfg.seed)


def lasso_conditional_tau2_mean(chain: ChainOutput, d: int) -> np.ndarray:
    """Posterior-mean estimate of each tau_j2 from a gibbs_lasso chain."""
    return chain.draws[:, d : 2 * d].mean(axis=0)


# ---------------------------------------------------------------------------
# mixture samplers


def gibbs_mixture_weights(data: Dataset, lam_ref: float, K: int, base,
                          cfg: GibbsConfig) -> ChainOutput:
    """Allocation-weight Gibbs for the Gaussian-location mixture.

    ``base`` supplies the fixed component variance and the Normal prior on the
    locations (an OverfittedMixture instance).  Retained draws are the weight
    vectors p plus the allocation counts c, which feed the marginal-likelihood
    reweighting profile (the counts give bounded importance ratios, unlike the
    raw weights whose ratios have infinite variance near the simplex edge).
    """
    if lam_ref <= 0:
        raise DomainError("lam_ref must be positive")
    y = data.y
    n = y.size
    g = rngmod.stream(cfg.seed, "gibbs-mix-weights")
    comp_var = base.comp_var
    m0, s02 = base.loc_mean, base.loc_var

    w = np.full(K, 1.0 / K)
    gamma = g.normal(m0, math.sqrt(s02), size=K)

    keep = (cfg.iters - cfg.burnin) // cfg.thin
    out = np.empty((keep, 2 * K))
    row = 0
    for it in range(cfg.iters):
        if n:
            logp = (
                np.log(np.maximum(w, 1e-300))[None, :]
                - 0.5 * (y[:, None] - gamma[None, :]) ** 2 / comp_var
            )
            logp -= logp.max(axis=1, keepdims=True)
            p = np.exp(logp)
            p /= p.sum(axis=1, keepdims=True)
            u = g.uniform(size=n)
            z = (p.cumsum(axis=1) < u[:, None]).sum(axis=1)
            counts = np.bincount(z, minlength=K)
        else:
            z = np.empty(0, dtype=int)
            counts = np.zeros(K, dtype=int)
        w = g.dirichlet(lam_ref + counts)
        for j in range(K):
            nj = counts[j]
            prec = nj / comp_var + 1.0 / s02
            mu = (y[z == j].sum() / comp_var if nj else 0.0) + m0 / s02
            mu /= prec
            gamma[j] = g.normal(mu, math.sqrt(1.0 / prec))
        if it >= cfg.burnin and (it - cfg.burnin) % cfg.thin == 0:
            out[row] = np.concatenate([w, counts])
            row += 1
    names = [f"p{j + 1}" for j in range(K)] + [f"c{j + 1}" for j in range(K)]
    return _chain(out[:row], names, cfg.seed)


def gibbs_gauss_mixture(data: Dataset, K: int, xi: float, tau: float, psi: float,
                        omega: float, cfg: GibbsConfig) -> ChainOutput:
    """Conjugate Gibbs for the known-K Gaussian mixture.

    Draw columns: (w_1..w_K, mu_1..mu_K, v_1..v_K).
    """
    y = data.y
    n = y.size
    g = rngmod.stream(cfg.seed, "gibbs-mix-full")
    w = np.full(K, 1.0 / K)
    mu = np.quantile(y, (np.arange(K) + 0.5) / K) if n else np.zeros(K)
    v = np.full(K, max(float(np.var(y)), 1e-3) if n else 1.0)

    keep = (cfg.iters - cfg.burnin) // cfg.thin
    out = np.empty((keep, 3 * K))
    row = 0
    for it in range(cfg.iters):
        if n:
            logp = (
                np.log(np.maximum(w, 1e-300))[None, :]
                - 0.5 * np.log(v)[None, :]
                - 0.5 * (y[:, None] - mu[None, :]) ** 2 / v[None, :]
            )
            logp -= logp.max(axis=1, keepdims=True)
            p = np.exp(logp)
            p /= p.sum(axis=1, keepdims=True)
            u = g.uniform(size=n)
            z = (p.cumsum(axis=1) < u[:, None]).sum(axis=1)
            counts = np.bincount(z, minlength=K)
        else:
            z = np.empty(0, dtype=int)
            counts = np.zeros(K, dtype=int)
        w = g.dirichlet(1.0 + counts)
        for j in range(K):
            nj = counts[j]
            yj = y[z == j] if n else np.empty(0)
            mean_j = (yj.sum() + tau * xi) / (nj + tau)
            mu[j] = g.normal(mean_j, math.sqrt(v[j] / (nj + tau)))
            shape = (omega + nj + 1.0) / 2.0
            scale = (psi + float(np.sum((yj - mu[j]) ** 2)) + tau * (mu[j] - xi) ** 2) / 2.0
            v[j] = scale / g.gamma(shape)
        if it >= cfg.burnin and (it - cfg.burnin) % cfg.thin == 0:
            out[row] = np.concatenate([w, mu, v])
            row += 1
    names = (
        [f"w{j + 1}" for j in range(K)]
        + [f"mu{j + 1}" for j in range(K)]
        + [f"v{j + 1}" for j in range(K)]
    )
    return _chain(out[:row], names, cfg.seed)
