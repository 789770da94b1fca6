import itertools
import math

import numpy as np
import pytest

from ebib.errors import DomainError, SamplerError
from ebib.marginal import _cluster_log_marginal
from ebib.models import (
    BayesLasso,
    Dataset,
    GPriorParams,
    GPriorRegression,
    MixtureParams,
    NormalMean,
    OverfittedMixture,
)
from ebib.numerics import log_gamma
from ebib.samplers import (
    GibbsConfig,
    _chain,
    effective_sample_size,
    gibbs_gauss_mixture,
    gibbs_lasso,
    gibbs_mixture_weights,
    orthogonal_design,
    simulate,
    uniform_design,
)


def test_gibbs_config_validation():
    with pytest.raises(DomainError):
        GibbsConfig(iters=10, burnin=10)
    with pytest.raises(DomainError):
        GibbsConfig(iters=10, burnin=2, thin=0)


def test_simulate_empty_dataset():
    assert simulate(NormalMean(), 2.0, 0, 0).n == 0


def test_simulate_same_seed_determinism():
    a = simulate(NormalMean(), 2.0, 20, (3, "rep", 1))
    b = simulate(NormalMean(), 2.0, 20, (3, "rep", 1))
    assert np.array_equal(a.y, b.y)
    c = simulate(NormalMean(), 2.0, 20, (3, "rep", 2))
    assert not np.array_equal(a.y, c.y)


def test_simulate_m1_clt_band():
    data = simulate(NormalMean(sigma2=1.0), 2.0, 10**5, 0)
    assert abs(float(np.mean(data.y)) - 2.0) < 3.0 * 10 ** (-5.0 / 2.0) * 2.0


def test_simulate_m4_counts_sum():
    from ebib.models import MarkovDirichlet

    fam = MarkovDirichlet(K=3)
    P = np.array([[0.7, 0.3, 0.0], [0.0, 0.4, 0.6], [0.5, 0.25, 0.25]])
    data = simulate(fam, P, 777, 4)
    assert data.counts.sum() == 777
    assert data.counts[0, 2] == 0 and data.counts[1, 0] == 0


def test_simulate_m3_design_is_centered():
    fam = GPriorRegression(V=np.eye(2))
    theta0 = GPriorParams(sigma=1.0, alpha=1.0, beta=[1.0, -1.0])
    data = simulate(fam, theta0, 64, 2)
    assert np.allclose(data.X.sum(axis=0), 0.0, atol=1e-9)


def test_design_generators():
    X = orthogonal_design(50, 3, seed=1, scale=2.0)
    G = X.T @ X
    assert np.allclose(G, np.diag(np.full(3, 50 * 4.0)), atol=1e-8)
    with pytest.raises(DomainError):
        orthogonal_design(2, 3, seed=0)
    U = uniform_design(2000, 2, seed=1)
    assert U.min() >= -10.0 and U.max() <= 10.0


def test_effective_sample_size_iid_vs_correlated():
    g = np.random.default_rng(0)
    iid = g.normal(size=4000)
    assert effective_sample_size(iid) > 2500
    ar = np.empty(4000)
    ar[0] = 0.0
    for t in range(1, 4000):
        ar[t] = 0.95 * ar[t - 1] + g.normal()
    assert effective_sample_size(ar) < 400
    assert effective_sample_size(np.ones(10)) == 10.0


def test_chain_rejects_non_finite_draws():
    draws = np.ones((5, 2))
    draws[3, 1] = math.nan
    with pytest.raises(SamplerError) as exc:
        _chain(draws, ("a", "b"), 0)
    assert exc.value.iteration == 3


def test_chain_output_csv(tmp_path):
    chain = _chain(np.arange(6.0).reshape(3, 2), ("a", "b"), 0)
    path = tmp_path / "chain.csv"
    chain.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "a,b"
    assert len(lines) == 4


def test_wald_moments_match_inverse_gaussian():
    g = np.random.default_rng(1)
    mu, lam = 2.0, 3.0
    x = g.wald(mu, lam, size=200000)
    assert float(np.mean(x)) == pytest.approx(mu, abs=0.02)
    assert float(np.var(x)) == pytest.approx(mu**3 / lam, abs=0.1)


# ---------------------------------------------------------------------------
# LASSO Gibbs


def _orthonormal_lasso_data(n=120, seed=31):
    X = orthogonal_design(n, 1, seed=seed, scale=1.0 / math.sqrt(n))  # X^tX = I
    g = np.random.default_rng(seed + 1)
    y = X[:, 0] * 1.2 + g.normal(size=n)
    return Dataset(y=y, X=X)


def test_gibbs_lasso_bit_reproducible():
    data = _orthonormal_lasso_data()
    cfg = GibbsConfig(iters=500, burnin=100, seed=9)
    a = gibbs_lasso(data, 1.0, sigma2=1.0, cfg=cfg)
    b = gibbs_lasso(data, 1.0, sigma2=1.0, cfg=cfg)
    assert np.array_equal(a.draws, b.draws)


def test_gibbs_lasso_histogram_matches_closed_marginal():
    # d=1, orthonormal design, known sigma: L1 between the Gibbs histogram
    # density and the closed-form coordinate posterior below 0.05
    fam = BayesLasso(sigma2=1.0)
    data = _orthonormal_lasso_data()
    lam = 1.5
    cfg = GibbsConfig(iters=51000, burnin=1000, seed=13)
    chain = gibbs_lasso(data, lam, sigma2=1.0, cfg=cfg)
    draws = chain.draws[:, 0]
    assert draws.shape[0] == 50000
    closed = fam.coordinate_posterior(lam, data, 0)
    edges = np.linspace(draws.min() - 0.05, draws.max() + 0.05, 81)
    hist, _ = np.histogram(draws, bins=edges, density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    width = edges[1] - edges[0]
    l1 = float(np.sum(np.abs(hist - closed.pdf(centers))) * width)
    # tail mass outside the histogram window
    l1 += float(1.0 - np.trapezoid(
        np.clip(closed.pdf(np.linspace(edges[0], edges[-1], 2001)), 0, None),
        np.linspace(edges[0], edges[-1], 2001)))
    assert l1 < 0.05


def test_gibbs_lasso_unknown_sigma_tracks_truth():
    g = np.random.default_rng(5)
    X = g.uniform(-2, 2, size=(200, 3))
    beta0 = np.array([1.0, 0.0, -1.5])
    y = X @ beta0 + g.normal(0, 1.0, size=200)
    chain = gibbs_lasso(Dataset(y=y, X=X), 1.0, sigma2=None,
                        cfg=GibbsConfig(iters=3000, burnin=500, seed=6))
    assert chain.names[-1] == "sigma2"
    s2_mean = float(chain.draws[:, -1].mean())
    assert 0.6 < s2_mean < 1.6


# ---------------------------------------------------------------------------
# mixture Gibbs


def _enumeration_posterior_mean_p1(y, lam, K, base):
    """Exact posterior mean of p1 by summing over all K^n allocations."""
    n = y.size
    yc = y - base.loc_mean
    terms, means = [], []
    for z in itertools.product(range(K), repeat=n):
        z = np.asarray(z)
        counts = np.bincount(z, minlength=K)
        logw = log_gamma(K * lam) - log_gamma(K * lam + n)
        for j in range(K):
            logw += log_gamma(lam + counts[j]) - log_gamma(lam)
            sel = yc[z == j]
            logw += _cluster_log_marginal(
                counts[j], float(sel.sum()), float((sel**2).sum()),
                base.comp_var, base.loc_var)
        terms.append(logw)
        means.append((lam + counts[0]) / (K * lam + n))
    terms = np.asarray(terms)
    w = np.exp(terms - terms.max())
    w /= w.sum()
    return float(w @ np.asarray(means))


def test_gibbs_mixture_weights_matches_enumeration_at_n8():
    fam = OverfittedMixture(K=2, comp_var=1.0, loc_mean=0.0, loc_var=4.0)
    t0 = MixtureParams(weights=[1.0, 0.0], means=[0.5, 0.0], variances=[1.0, 1.0])
    data = simulate(fam, t0, 8, 77)
    lam = 0.5
    exact = _enumeration_posterior_mean_p1(data.y, lam, 2, fam)
    chain = gibbs_mixture_weights(data, lam, 2, fam,
                                  GibbsConfig(iters=21000, burnin=1000, seed=8))
    p1 = chain.draws[:, 0]
    se = float(np.std(p1, ddof=1)) / math.sqrt(effective_sample_size(p1))
    assert abs(float(np.mean(p1)) - exact) <= 3.0 * se


def test_gibbs_mixture_weights_emptying_tendency():
    # single-component truth, lam below d0/2: the extra weight empties out
    fam = OverfittedMixture(K=2, comp_var=1.0, loc_mean=0.0, loc_var=4.0)
    t0 = MixtureParams(weights=[1.0, 0.0], means=[0.0, 0.0], variances=[1.0, 1.0])
    data = simulate(fam, t0, 400, 21)
    chain = gibbs_mixture_weights(data, 0.5, 2, fam,
                                  GibbsConfig(iters=4000, burnin=1000, seed=22))
    w = chain.draws[:, :2]
    assert float(np.mean(np.min(w, axis=1))) < 0.2


def test_gibbs_mixture_weights_bit_reproducible():
    fam = OverfittedMixture(K=2)
    data = simulate(fam, MixtureParams(weights=[1.0, 0.0], means=[0.0, 0.0],
                                       variances=[1.0, 1.0]), 30, 5)
    cfg = GibbsConfig(iters=300, burnin=50, seed=4)
    a = gibbs_mixture_weights(data, 0.5, 2, fam, cfg)
    b = gibbs_mixture_weights(data, 0.5, 2, fam, cfg)
    assert np.array_equal(a.draws, b.draws)


def test_gibbs_gauss_mixture_recovers_separated_components():
    fam = OverfittedMixture(K=2, comp_var=1.0)  # only for simulate dispatch
    t0 = MixtureParams(weights=[0.5, 0.5], means=[-4.0, 4.0], variances=[1.0, 1.0])
    data = simulate(fam, t0, 400, 9)
    chain = gibbs_gauss_mixture(data, K=2, xi=0.0, tau=0.1, psi=2.0, omega=2.0,
                                cfg=GibbsConfig(iters=4000, burnin=1000, seed=10))
    mu = np.sort(chain.draws[:, 2:4].mean(axis=0))
    assert mu[0] == pytest.approx(-4.0, abs=0.3)
    assert mu[1] == pytest.approx(4.0, abs=0.3)
    v = chain.draws[:, 4:6].mean(axis=0)
    assert np.all(v > 0.5) and np.all(v < 2.0)


def test_gibbs_gauss_mixture_bit_reproducible():
    fam = OverfittedMixture(K=2, comp_var=1.0)
    t0 = MixtureParams(weights=[0.5, 0.5], means=[-2.0, 2.0], variances=[1.0, 1.0])
    data = simulate(fam, t0, 50, 11)
    cfg = GibbsConfig(iters=400, burnin=100, seed=12)
    a = gibbs_gauss_mixture(data, K=2, xi=0.0, tau=1.0, psi=2.0, omega=2.0, cfg=cfg)
    b = gibbs_gauss_mixture(data, K=2, xi=0.0, tau=1.0, psi=2.0, omega=2.0, cfg=cfg)
    assert np.array_equal(a.draws, b.draws)
