import numpy as np
import pytest

from capnet.degree_stats import DegreeSample
from capnet.errors import EstimationError, InputError
from capnet.powerlaw import (
    ZetaSampler,
    _lr_statistic,
    bootstrap_ci,
    fit_lognormal_tail,
    fit_power_law,
    gof_pvalue,
    vuong_lr_test,
)
from capnet.synth import gen_discrete_power_law


def lognormal_sample(mu, sigma, n, seed, xmin=1):
    """Round-to-nearest-integer lognormal draws conditioned on k >= xmin."""
    rng = np.random.default_rng(seed)
    out = np.empty(0, dtype=np.int64)
    while len(out) < n:
        x = np.rint(rng.lognormal(mu, sigma, n)).astype(np.int64)
        out = np.concatenate([out, x[x >= xmin]])
    return DegreeSample(out[:n], "out")


# -- fit_power_law ------------------------------------------------------------


def test_recovery_gamma_25():
    sample = gen_discrete_power_law(50_000, 2.5, xmin=1, seed=101)
    fit = fit_power_law(sample)
    assert 2.45 <= fit.gamma <= 2.55
    assert fit.xmin == 1
    assert fit.n_tail == 50_000


def test_recovery_gamma_285():
    sample = gen_discrete_power_law(50_000, 2.85, xmin=1, seed=102)
    fit = fit_power_law(sample)
    assert 2.78 <= fit.gamma <= 2.92


def test_tiny_sample_rejected():
    with pytest.raises(EstimationError):
        fit_power_law(DegreeSample(np.array([1, 2, 3, 4, 5]), "out"))


def test_fixed_xmin_mode():
    sample = gen_discrete_power_law(30_000, 2.5, xmin=1, seed=103)
    fit = fit_power_law(sample, xmin=3)
    assert fit.xmin == 3
    assert fit.n_tail == int((sample.values >= 3).sum())
    with pytest.raises(InputError):
        fit_power_law(sample, xmin=0)


def test_fixed_xmin_too_deep():
    sample = DegreeSample(np.array([1] * 50 + [2] * 5 + [9]), "out")
    with pytest.raises(EstimationError):
        fit_power_law(sample, xmin=2)


def test_gamma_permutation_invariant():
    sample = gen_discrete_power_law(20_000, 2.5, xmin=1, seed=104)
    rng = np.random.default_rng(0)
    shuffled = DegreeSample(rng.permutation(sample.values), "out")
    assert fit_power_law(sample).gamma == fit_power_law(shuffled).gamma


def test_heavier_nested_tail_lowers_gamma():
    # inverse-CDF coupling: same uniforms, decreasing gamma => pointwise larger
    fits = []
    for gamma in (3.0, 2.5, 2.2):
        sample = gen_discrete_power_law(30_000, gamma, xmin=1, seed=105)
        fits.append(fit_power_law(sample, xmin=1).gamma)
    assert fits[0] > fits[1] > fits[2]


def test_fitted_ccdf_closed_form():
    sample = gen_discrete_power_law(30_000, 2.5, xmin=1, seed=106)
    fit = fit_power_law(sample)
    from scipy.special import zeta

    ks = np.array([1, 2, 5, 10])
    expect = zeta(fit.gamma, ks) / zeta(fit.gamma, fit.xmin)
    assert np.allclose(fit.fitted_ccdf(ks), expect)
    # log-log slope of the fitted CCDF tends to 1 - gamma deep in the tail
    hi = np.array([200.0, 400.0])
    slope = np.diff(np.log(fit.fitted_ccdf(hi))) / np.diff(np.log(hi))
    assert slope[0] == pytest.approx(1 - fit.gamma, abs=0.02)
    assert fit.scaling_constant == pytest.approx(-np.log(zeta(fit.gamma, fit.xmin)))


# -- bootstrap ----------------------------------------------------------------


def test_bootstrap_interval_covers_truth():
    sample = gen_discrete_power_law(50_000, 2.5, xmin=1, seed=107)
    lo, hi = bootstrap_ci(sample, b=200, seed=7)
    assert lo <= 2.5 <= hi
    assert hi - lo < 0.15


def test_bootstrap_deterministic_and_thread_invariant():
    sample = gen_discrete_power_law(20_000, 2.5, xmin=1, seed=108)
    a = bootstrap_ci(sample, b=100, seed=42, workers=1)
    b = bootstrap_ci(sample, b=100, seed=42, workers=1)
    c = bootstrap_ci(sample, b=100, seed=42, workers=4)
    assert a == b == c


def test_bootstrap_needs_100_replicates():
    sample = gen_discrete_power_law(20_000, 2.5, xmin=1, seed=109)
    with pytest.raises(InputError):
        bootstrap_ci(sample, b=10, seed=1)


# -- lognormal ----------------------------------------------------------------


def test_lognormal_recovery():
    sample = lognormal_sample(1.0, 1.0, 50_000, seed=110)
    fit = fit_lognormal_tail(sample, 1)
    assert 0.95 <= fit.mu <= 1.05
    assert 0.95 <= fit.sigma <= 1.05


def test_lognormal_degenerate_tail():
    sample = DegreeSample(np.array([4] * 100), "out")
    with pytest.raises(EstimationError):
        fit_lognormal_tail(sample, 4)


@pytest.mark.slow
def test_power_law_likelihood_dominates_on_power_law_tail():
    wins = 0
    for trial in range(20):
        sample = gen_discrete_power_law(20_000, 2.5, xmin=1, seed=200 + trial)
        pl = fit_power_law(sample, xmin=1)
        ln = fit_lognormal_tail(sample, 1)
        wins += pl.loglik > ln.loglik
    assert wins >= 19


# -- Vuong test ----------------------------------------------------------------


def test_vuong_strong_power_law():
    sample = gen_discrete_power_law(100_000, 2.5, xmin=1, seed=111)
    pl = fit_power_law(sample)
    ln = fit_lognormal_tail(sample, pl.xmin)
    res = vuong_lr_test(sample, pl, ln)
    assert res.verdict == "power_law"
    assert res.r > 0 and res.p < 0.05


def test_vuong_strong_lognormal():
    sample = lognormal_sample(0.5, 2.0, 50_000, seed=112)
    pl = fit_power_law(sample)
    ln = fit_lognormal_tail(sample, pl.xmin)
    res = vuong_lr_test(sample, pl, ln)
    assert res.verdict == "lognormal"
    assert res.r < 0 and res.p < 0.05


def test_vuong_xmin_mismatch():
    sample = gen_discrete_power_law(20_000, 2.5, xmin=1, seed=113)
    pl = fit_power_law(sample, xmin=1)
    ln = fit_lognormal_tail(sample, 2)
    with pytest.raises(InputError):
        vuong_lr_test(sample, pl, ln)


def test_vuong_zero_variance_degenerate():
    with pytest.raises(EstimationError):
        _lr_statistic(np.full(20, 0.37), np.ones(20))


# -- goodness of fit -------------------------------------------------------------


def test_gof_needs_100_sims():
    sample = gen_discrete_power_law(5_000, 2.5, xmin=1, seed=114)
    fit = fit_power_law(sample)
    with pytest.raises(InputError):
        gof_pvalue(sample, fit, nsims=10, seed=1)


def test_gof_deterministic():
    sample = gen_discrete_power_law(3_000, 2.5, xmin=1, seed=115)
    fit = fit_power_law(sample)
    p1 = gof_pvalue(sample, fit, nsims=100, seed=9)
    p2 = gof_pvalue(sample, fit, nsims=100, seed=9)
    p3 = gof_pvalue(sample, fit, nsims=100, seed=9, workers=4)
    assert p1 == p2 == p3


@pytest.mark.slow
def test_gof_self_consistency():
    rejects = 0
    for trial in range(20):
        sample = gen_discrete_power_law(5_000, 2.5, xmin=1, seed=300 + trial)
        fit = fit_power_law(sample)
        p = gof_pvalue(sample, fit, nsims=100, seed=300 + trial)
        rejects += p < 0.1
    assert rejects <= 4  # reject-rate at the 0.1 threshold stays near nominal


@pytest.mark.slow
def test_gof_rejects_lognormal_misfit():
    low = 0
    for trial in range(20):
        sample = lognormal_sample(0.5, 2.0, 50_000, seed=400 + trial)
        fit = fit_power_law(sample)
        p = gof_pvalue(sample, fit, nsims=100, seed=400 + trial)
        low += p < 0.1
    assert low >= 16


# -- sampler ---------------------------------------------------------------------


def test_sampler_lump_mass_recorded():
    sampler = ZetaSampler(2.2, 1, cap=10_000)
    assert sampler.lumped_mass > 0
    assert sampler.kmax == 10_000
    draws = sampler.sample(1000, np.random.default_rng(1))
    assert draws.max() <= sampler.kmax
    tight = ZetaSampler(3.2, 1)
    assert tight.lumped_mass <= 1e-12
