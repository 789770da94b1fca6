"""Marginal likelihood m_lam(y) evaluation.

Four strategies: closed form (M1, M2, M3, M4, M5 with known sigma),
quadrature (M1 cross-check), exact allocation enumeration (mixtures at tiny n)
and posterior importance reweighting across a concentration grid (mixtures at
realistic n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapabilityError,
    CapacityError,
    DomainError,
    EstimationError,
    ReliabilityError,
)
from .models import BayesLasso, Dataset, GPriorRegression
from .numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    integrate,
    log_gamma,
    low_rank_gaussian_logpdf,
)

_KINDS = ("closed-form", "quadrature", "enumeration", "reweighting")

ENUMERATION_CAP = 1 << 20
MIN_RELIABLE_ESS = 50.0


@dataclass(frozen=True)
class MarginalStrategy:
    kind: str = "closed-form"
    reference_lam: float | None = None
    draws: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown marginal strategy {self.kind!r}")
        if self.draws < 1:
            raise DomainError("draws must be positive")


def log_marginal(family, lam, data: Dataset, strategy: MarginalStrategy):
    """log m_lam(y); stochastic strategies return (estimate, std_error)."""
    fid = family.id
    if strategy.kind == "closed-form":
        if fid == "M1":
            return _m1_closed(family, lam, data)
        if fid == "M2":
            return _m2_closed(family, lam, data)
        if fid == "M3":
            return _m3_closed(family, lam, data)
        if fid == "M4":
            return markov_log_marginal(data.counts, family.validate_hyperparam(lam))
        if fid == "M5":
            return _m5_closed(family, lam, data)
        raise CapabilityError(f"{fid}: no closed-form marginal")
    if strategy.kind == "quadrature":
        if fid == "M1":
            return _m1_quadrature(family, lam, data)
        raise CapabilityError(f"{fid}: quadrature marginal not supported")
    if strategy.kind == "enumeration":
        if fid != "M7":
            raise CapabilityError("enumeration is for the overfitted mixture family")
        return mixture_marginal_exact(data, family.validate_hyperparam(lam),
                                      family.K, family)
    # reweighting
    if fid != "M7":
        raise CapabilityError("reweighting is for the overfitted mixture family")
    ref = strategy.reference_lam
    if ref is None:
        raise DomainError("reweighting needs reference_lam")
    rows = mixture_marginal_profile(
        data, [family.validate_hyperparam(lam)], ref,
        draws=strategy.draws, seed=strategy.seed, base=family, K=family.K,
    )
    r = rows[0]
    if not r["reliable"]:
        raise ReliabilityError("reweighting ESS too low", ess=r["ess"])
    return r["delta_logm"], r["stderr"]


def _m1_closed(family, lam, data) -> float:
    lam = family.validate_hyperparam(lam, allow_boundary=True)
    return low_rank_gaussian_logpdf(data.y, 0.0, family.sigma2, lam)


def _m1_quadrature(family, lam, data) -> float:
    # Gauss-Hermite against a Gaussian weight adapted to the integrand: nodes
    # are placed where likelihood * prior concentrates, not on the prior scale
    lam = family.validate_hyperparam(lam)
    spec = QuadratureSpec(scheme="gauss-hermite", grid_points=64)
    y = data.y
    s2 = family.sigma2
    n = y.size
    mode = n * lam * float(np.mean(y)) / (n * lam + s2)
    v = lam * s2 / (n * lam + s2)
    scale = math.sqrt(2.0 * v)

    def log_g(theta):
        return (
            -0.5 * n * math.log(2.0 * math.pi * s2)
            - 0.5 * float(np.sum((y - theta) ** 2)) / s2
            - 0.5 * math.log(2.0 * math.pi * lam)
            - 0.5 * theta * theta / lam
        )

    log_g0 = log_g(mode)
    val = integrate(
        lambda x: math.exp(log_g(mode + scale * x) - log_g0),
        -math.inf, math.inf, spec,
    )
    if not val > 0:
        raise EstimationError("quadrature marginal underflowed; use closed form")
    return math.log(val) + math.log(scale) + log_g0


def _m2_closed(family, lam, data) -> float:
    tau2 = family.validate_hyperparam(lam, allow_boundary=True)
    X, y, n = data.X, data.y, data.n
    s2 = family.sigma2
    active = np.flatnonzero(tau2 > 0)
    yy = float(y @ y)
    if active.size == 0:
        return -0.5 * (n * math.log(2.0 * math.pi * s2) + yy / s2)
    Xa = X[:, active]
    Da = tau2[active]
    G = Xa.T @ Xa
    M = G + s2 * np.diag(1.0 / Da)
    b = Xa.T @ y
    quad = (yy - float(b @ np.linalg.solve(M, b))) / s2
    sign, logdet_small = np.linalg.slogdet(
        np.eye(active.size) + (G * Da[None, :]) / s2
    )
    if sign <= 0:
        raise DomainError("marginal covariance not positive definite")
    logdet = n * math.log(s2) + logdet_small
    return -0.5 * (n * math.log(2.0 * math.pi) + logdet + quad)


def _m3_closed(family, lam, data) -> float:
    # flat prior on the intercept and 1/sigma2 on the variance: the additive
    # constant follows the convention pi(alpha, sigma2) = 1/sigma2
    lam = family.validate_hyperparam(lam, allow_boundary=True)
    n, p = data.n, data.X.shape[1]
    if n <= p + 1:
        raise DomainError("need n > d - 1")
    ssr, sse, _ = GPriorRegression.suff_stats(data)
    q = sse + ssr / (1.0 + n * lam)
    return (
        -0.5 * math.log(n)
        - 0.5 * (n - 1.0) * math.log(2.0 * math.pi)
        + log_gamma((n - 1.0) / 2.0)
        - 0.5 * p * math.log(1.0 + n * lam)
        - 0.5 * (n - 1.0) * math.log(q / 2.0)
    )


def _m5_closed(family: BayesLasso, lam, data) -> float:
    lam = family.validate_hyperparam(lam)
    if not family.sigma_known:
        raise CapabilityError("closed-form M5 marginal requires known sigma2")
    norms = BayesLasso._check_orthogonal(data.X)
    s = math.sqrt(family.sigma2)
    X, y, n = data.X, data.y, data.n
    bhat = (X.T @ y) / norms**2
    sse = float(np.sum((y - X @ bhat) ** 2))
    out = -0.5 * n * math.log(2.0 * math.pi * s * s) - sse / (2.0 * s * s)
    for j, (sj, bj) in enumerate(zip(norms, bhat)):
        out += 0.5 * math.log(2.0 * math.pi) + math.log(s / sj)
        out += math.log(lam / (2.0 * s))
        out += BayesLasso.laplace_gauss_log_normalizer(float(bj), float(sj), s, lam)
    return float(out)


# ---------------------------------------------------------------------------
# Markov / Dirichlet


def markov_log_marginal(counts, alpha) -> float:
    """log u(y, alpha): product over rows of Dirichlet-multinomial mass ratios.

    The multinomial path constant is fixed to 0, matching the likelihood
    convention for this family.
    """
    counts = np.asarray(counts, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=float)
    total = 0.0
    for i in range(counts.shape[0]):
        a, c = alpha[i], counts[i]
        total += log_gamma(a.sum()) - log_gamma(a.sum() + c.sum())
        total += sum(log_gamma(aj + cj) - log_gamma(aj) for aj, cj in zip(a, c))
    return total


def markov_log_marginal_factorials(counts, alpha) -> float:
    """Independent cross-check: ascending-factorial product form of u(y, alpha)."""
    counts = np.asarray(counts, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=float)
    total = 0.0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            for k in range(counts[i, j]):
                total += math.log(alpha[i, j] + k)
        row_total = float(alpha[i].sum())
        for k in range(int(counts[i].sum())):
            total -= math.log(row_total + k)
    return total


# ---------------------------------------------------------------------------
# mixtures


def _cluster_log_marginal(m, S, Q, comp_var, loc_var) -> float:
    """Marginal of m observations in one cluster under the conjugate base.

    (m, S, Q) are the count, sum and sum of squares of the centred values
    y - loc_mean; the joint is N(loc_mean 1, comp_var I + loc_var J).
    """
    if m == 0:
        return 0.0
    quad = (Q - loc_var * S * S / (comp_var + m * loc_var)) / comp_var
    logdet = m * math.log(comp_var) + math.log1p(m * loc_var / comp_var)
    return -0.5 * (m * math.log(2.0 * math.pi) + logdet + quad)


def mixture_marginal_exact(data: Dataset, lam: float, K: int, base) -> float:
    """Exact log m_lam by summation over all K^n allocations.

    ``base`` supplies comp_var, loc_mean, loc_var (Normal-known-variance
    component with a Normal prior on its location).  Allocations are walked
    depth-first with per-cluster sufficient statistics updated incrementally.
    """
    if lam <= 0:
        raise DomainError("lam must be positive")
    y = np.asarray(data.y, float)
    n = y.size
    if K**n > ENUMERATION_CAP:
        raise CapacityError(f"K^n = {K**n} exceeds the enumeration cap")
    cv, lm, lv = base.comp_var, base.loc_mean, base.loc_var
    yc = y - lm

    lg_lam = log_gamma(lam)
    alloc_const = log_gamma(K * lam) - log_gamma(K * lam + n)

    counts = np.zeros(K, dtype=np.int64)
    sums = np.zeros(K)
    sqs = np.zeros(K)
    cluster_lm = np.zeros(K)  # running per-cluster log-marginals
    terms = []

    def recurse(i, running):
        if i == n:
            alloc = alloc_const + sum(
                log_gamma(lam + c) - lg_lam for c in counts
            )
            terms.append(alloc + running)
            return
        for j in range(K):
            prev = cluster_lm[j]
            counts[j] += 1
            sums[j] += yc[i]
            sqs[j] += yc[i] ** 2
            cluster_lm[j] = _cluster_log_marginal(counts[j], sums[j], sqs[j], cv, lv)
            recurse(i + 1, running - prev + cluster_lm[j])
            counts[j] -= 1
            sums[j] -= yc[i]
            sqs[j] -= yc[i] ** 2
            cluster_lm[j] = prev

    recurse(0, 0.0)
    terms = np.asarray(terms)
    mx = terms.max()
    return float(mx + math.log(np.sum(np.exp(terms - mx))))


def mixture_marginal_profile(data: Dataset, lam_grid, lam_ref: float,
                             draws: int, seed, base, K: int):
    """Relative log-marginal profile log m_lam - log m_lam_ref by reweighting.

    Only the weight prior depends on lam; conditioning on the allocation counts
    integrates it out exactly, so the ratio is the posterior expectation (under
    lam_ref) of A(c; lam)/A(c; lam_ref), where A is the Dirichlet-multinomial
    allocation mass.  These ratios are bounded over the finite count set, unlike
    the raw-weight ratios which have infinite variance for lam < lam_ref.
    Returns one record per grid value with ESS-based reliability flags.
    """
    from .samplers import GibbsConfig, gibbs_mixture_weights

    lam_grid = [float(v) for v in lam_grid]
    if lam_ref <= 0 or any(v <= 0 for v in lam_grid):
        raise DomainError("concentrations must be positive")
    if any(v > 20.0 * lam_ref or v < lam_ref / 20.0 for v in lam_grid):
        raise DomainError("grid must stay within a factor 20 of lam_ref")
    cfg = GibbsConfig(iters=draws + max(draws // 4, 200),
                      burnin=max(draws // 4, 200), thin=1, seed=seed)
    chain = gibbs_mixture_weights(data, lam_ref, K, base, cfg)
    counts = chain.draws[:, K : 2 * K]
    T = counts.shape[0]
    n = data.n
    lg = np.vectorize(log_gamma)

    def log_alloc_mass(lam):
        return (
            log_gamma(K * lam) - log_gamma(K * lam + n)
            + np.sum(lg(lam + counts) - log_gamma(lam), axis=1)
        )

    rows = []
    for lam in lam_grid:
        logw = log_alloc_mass(lam) - log_alloc_mass(lam_ref)
        mx = logw.max()
        w = np.exp(logw - mx)
        mean_w = float(np.mean(w))
        est = mx + math.log(mean_w)
        ess = float(np.sum(w)) ** 2 / float(np.sum(w**2))
        # the weights come from a Gibbs chain: deflate the sample size by the
        # autocorrelation time of the weight series
        from .samplers import effective_sample_size

        t_eff = min(effective_sample_size(w), float(T))
        stderr = float(np.std(w, ddof=1)) / (mean_w * math.sqrt(max(t_eff, 1.0)))
        rows.append(
            {
                "lam": lam,
                "delta_logm": est,
                "stderr": stderr,
                "ess": ess,
                "reliable": ess >= MIN_RELIABLE_ESS,
            }
        )
    return rows


def profile_argmax(rows):
    """Restricted-MMLE grid argmax over the reliable points of a profile."""
    ok = [r for r in rows if r["reliable"]]
    if not ok:
        raise EstimationError("every profile point is unreliable")
    best = max(ok, key=lambda r: (r["delta_logm"], -r["lam"]))
    return best["lam"]
