"""Gamma and inverse-Gaussian subordinator sampling, MLEs and Fisher data."""

import math

import numpy as np
import pytest

from levyestim.errors import (
    DataError,
    DomainError,
    NonpositiveBrace,
    NonpositiveK,
)
from levyestim.special_fn import digamma
from levyestim.stable_core import IncrementSample
from levyestim.subordinators import (
    GammaSubParams,
    IGSubParams,
    gamma_fisher,
    gamma_mle,
    gamma_moment_estimate,
    ig_fisher,
    ig_mle,
    sample_gamma_sub,
    sample_ig_sub,
)


def _sample(values, h=1.0):
    return IncrementSample(np.asarray(values, dtype=float), h, {})


# ---------------------------------------------------------------------------
# parameter validation and sampling


def test_params_validation():
    with pytest.raises(DomainError):
        GammaSubParams(0.0, 1.0)
    with pytest.raises(DomainError):
        GammaSubParams(1.0, -2.0)
    with pytest.raises(DomainError):
        IGSubParams(-1.0, 1.0)
    with pytest.raises(DomainError):
        IGSubParams(1.0, 0.0)


def test_gamma_sampler_mean():
    params = GammaSubParams(2.0, 1.5)
    s = sample_gamma_sub(params, 0.3, 100_000, seed=8)
    assert np.all(s.values >= 0.0)
    se = s.values.std(ddof=1) / math.sqrt(s.values.size)
    assert abs(s.values.mean() - 2.0 * 0.3 / 1.5) <= 3.0 * se


def test_ig_sampler_mean_and_inverse_mean():
    # E X_h = delta h / gamma and E 1/X_h = 1/(delta h)^2 + gamma/(delta h)
    params = IGSubParams(1.4, 2.2)
    dh = 1.4 * 0.3
    s = sample_ig_sub(params, 0.3, 100_000, seed=9)
    assert np.all(s.values > 0.0)
    se = s.values.std(ddof=1) / math.sqrt(s.values.size)
    assert abs(s.values.mean() - dh / 2.2) <= 3.0 * se
    inv = 1.0 / s.values
    se_inv = inv.std(ddof=1) / math.sqrt(inv.size)
    assert abs(inv.mean() - (1.0 / dh ** 2 + 2.2 / dh)) <= 3.0 * se_inv


def test_sampler_mesh_validation():
    params = GammaSubParams(1.0, 1.0)
    with pytest.raises(DomainError):
        sample_gamma_sub(params, -0.1, 10)
    with pytest.raises(DomainError):
        sample_gamma_sub(params, 0.1, 0)
    with pytest.warns(UserWarning, match="degenerate"):
        sample_gamma_sub(GammaSubParams(1e-11, 1.0), 1e-3, 3, seed=0)


def test_sampler_determinism():
    params = IGSubParams(1.0, 2.0)
    a = sample_ig_sub(params, 0.1, 50, seed=42)
    b = sample_ig_sub(params, 0.1, 50, seed=42)
    assert np.array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# gamma MLE


def test_gamma_mle_rejects_nonpositive_data():
    with pytest.raises(DataError):
        gamma_mle(_sample([1.0, -0.5, 2.0]))
    with pytest.raises(DataError):
        gamma_mle(_sample([1.0, 0.0, 2.0]))


def test_gamma_mle_constant_data():
    # equal increments make K = 0 exactly (Jensen equality)
    with pytest.raises(NonpositiveK):
        gamma_mle(_sample([0.7, 0.7, 0.7, 0.7]))


def test_gamma_mle_near_equal_data_blows_up():
    # K -> 0+ forces delta_hat -> infinity
    vals = 1.0 + 1e-5 * np.array([0.5, -0.5, 0.25, -0.25, 0.1, -0.1])
    s = _sample(vals)
    t_total = vals.size * s.h
    k_stat = (t_total * math.log(vals.sum() / t_total)
              - s.h * float(np.sum(np.log(vals / s.h))))
    assert 0.0 < k_stat < 1e-6 * t_total
    delta_hat, _ = gamma_mle(s)
    assert delta_hat > 1e3


def test_gamma_mle_estimating_equation_residual():
    s = sample_gamma_sub(GammaSubParams(2.0, 1.0), 0.05, 400, seed=3)
    delta_hat, gamma_hat = gamma_mle(s)
    vals = s.values
    t_total = vals.size * s.h
    k_stat = (t_total * math.log(vals.sum() / t_total)
              - s.h * float(np.sum(np.log(vals / s.h))))
    lhs = t_total * (math.log(delta_hat * s.h) - digamma(delta_hat * s.h))
    assert lhs == pytest.approx(k_stat, rel=1e-10)
    assert gamma_hat == pytest.approx(delta_hat * t_total / vals.sum(),
                                      rel=1e-12)


def test_gamma_mle_time_rescaling():
    # the estimating equation is invariant under h -> 1, delta -> delta h:
    # delta_hat scales by h and gamma_hat is unchanged
    s = sample_gamma_sub(GammaSubParams(2.0, 1.0), 0.05, 400, seed=3)
    d_h, g_h = gamma_mle(s)
    d_1, g_1 = gamma_mle(_sample(s.values, h=1.0))
    assert d_1 == pytest.approx(0.05 * d_h, rel=1e-9)
    assert g_1 == pytest.approx(g_h, rel=1e-9)


def test_gamma_mle_lhs_strictly_decreasing():
    # log(x) - psi(x) decreasing over the bracket-search range ensures a
    # unique root of the likelihood equation
    h = 0.05
    grid = np.geomspace(1e-4 / h, 1e4 / h, 200)
    lhs = np.array([math.log(d * h) - digamma(d * h) for d in grid])
    assert np.all(np.diff(lhs) < 0.0)


def test_gamma_mle_mc_variances():
    # high-frequency design: n = 2000, h = n^{-3/5}; inverse Fisher targets
    # delta^2 = 4 for sqrt(n)(delta_hat - delta) and gamma^2/delta = 0.5
    # for sqrt(T)(gamma_hat - gamma)
    n, reps = 2000, 500
    h = n ** -0.6
    t_total = n * h
    out = np.empty((reps, 2))
    for r in range(reps):
        s = sample_gamma_sub(GammaSubParams(2.0, 1.0), h, n, seed=50_000 + r)
        out[r] = gamma_mle(s)
    v_delta = np.var(math.sqrt(n) * (out[:, 0] - 2.0), ddof=1)
    v_gamma = np.var(math.sqrt(t_total) * (out[:, 1] - 1.0), ddof=1)
    assert abs(v_delta - 4.0) <= 0.15 * 4.0
    assert abs(v_gamma - 0.5) <= 0.15 * 0.5


# ---------------------------------------------------------------------------
# gamma moment estimator


def test_gamma_moment_hand_values():
    delta_hat, gamma_hat, cov = gamma_moment_estimate(_sample([1.0, 2.0]))
    # T = 2, m1 = 3/2, m2 = 5/2
    assert gamma_hat == pytest.approx(0.6, rel=1e-14)
    assert delta_hat == pytest.approx(0.9, rel=1e-14)
    expect = np.array([[2.0 * 0.9, 2.0 * 0.6],
                       [2.0 * 0.6, 3.0 * 0.36 / 0.9]]) / 2.0
    assert np.allclose(cov, expect, rtol=1e-13)


def test_gamma_moment_rejects_bad_data():
    with pytest.raises(DataError):
        gamma_moment_estimate(_sample([1.0, -1.0]))


def test_gamma_moment_mc_variance():
    # T = 100 with delta h = 0.04; the finite-sample variance of
    # sqrt(T)(delta_hat - delta) sits ~18% below the limit 2 delta = 4,
    # inside the 20% band (margins checked over 6000 replications)
    n, h, reps = 5_000, 0.02, 6000
    t_total = n * h
    d_m = np.empty(reps)
    for r in range(reps):
        s = sample_gamma_sub(GammaSubParams(2.0, 1.0), h, n, seed=200_000 + r)
        d_m[r] = gamma_moment_estimate(s)[0]
    v = np.var(math.sqrt(t_total) * (d_m - 2.0), ddof=1)
    assert abs(v - 4.0) <= 0.20 * 4.0


def test_gamma_moment_vs_mle_efficiency():
    # the moment gamma_hat is 3x noisier than the MLE's in the limit;
    # T = 400 keeps finite-sample distortion inside the 25% band
    n, h, reps = 20_000, 0.02, 2000
    g_m = np.empty(reps)
    g_l = np.empty(reps)
    for r in range(reps):
        s = sample_gamma_sub(GammaSubParams(2.0, 1.0), h, n, seed=300_000 + r)
        g_m[r] = gamma_moment_estimate(s)[1]
        g_l[r] = gamma_mle(s)[1]
    eff = np.var(g_l, ddof=1) / np.var(g_m, ddof=1)
    assert abs(eff - 1.0 / 3.0) <= 0.25 / 3.0


# ---------------------------------------------------------------------------
# IG MLE


def test_ig_mle_hand_values():
    delta_hat, gamma_hat = ig_mle(_sample([1.0, 2.0]))
    assert delta_hat == pytest.approx(math.sqrt(12.0), rel=1e-12)
    assert gamma_hat == pytest.approx(2.0 * math.sqrt(12.0) / 3.0, rel=1e-12)


def test_ig_mle_constant_data():
    with pytest.raises(NonpositiveBrace):
        ig_mle(_sample([1.3, 1.3, 1.3]))


def test_ig_mle_rejects_nonpositive_data():
    with pytest.raises(DataError):
        ig_mle(_sample([1.0, 0.0]))


def test_ig_mle_brace_nonnegative():
    # AM-HM: (1/n) sum h^2/x - T^2/X_T >= 0 on any positive sample
    rng = np.random.default_rng(77)
    for _ in range(25):
        vals = rng.uniform(0.1, 5.0, size=rng.integers(2, 30))
        h = float(rng.uniform(0.05, 2.0))
        n = vals.size
        brace = (h * h * float(np.sum(1.0 / vals))
                 - (n * h) ** 2 / float(vals.sum())) / n
        assert brace >= -1e-15


def test_ig_mle_mc_variance():
    # inverse Fisher target delta^2/2 = 0.5 for sqrt(n)(delta_hat - delta)
    n, reps = 2000, 500
    h = n ** -0.6
    d_hat = np.empty(reps)
    for r in range(reps):
        s = sample_ig_sub(IGSubParams(1.0, 2.0), h, n, seed=60_000 + r)
        d_hat[r] = ig_mle(s)[0]
    v = np.var(math.sqrt(n) * (d_hat - 1.0), ddof=1)
    assert abs(v - 0.5) <= 0.15 * 0.5


# ---------------------------------------------------------------------------
# Fisher matrices


def test_gamma_fisher_values():
    info = gamma_fisher(GammaSubParams(2.0, 1.0))
    assert np.allclose(info, np.diag([0.25, 2.0]), rtol=1e-14)


def test_ig_fisher_values():
    info = ig_fisher(IGSubParams(1.0, 2.0))
    assert np.allclose(info, np.diag([2.0, 0.5]), rtol=1e-14)


def test_fisher_matrices_diagonal():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d, g = rng.uniform(0.2, 5.0, size=2)
        for info in (gamma_fisher(GammaSubParams(d, g)),
                     ig_fisher(IGSubParams(d, g))):
            off = info - np.diag(np.diag(info))
            assert np.all(off == 0.0)
            assert np.all(np.diag(info) > 0.0)
