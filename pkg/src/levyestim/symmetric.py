"""Median, log-moment and fractional-moment estimators for symmetric
stable increments with drift.

Data model: n = 2k + 1 increments of X at mesh h with
L(X_1) = S_beta(sigma, 0, gamma); an even-length sample drops its last
increment in time order.  Every estimator centers at the sample median m_n,
giving gamma_hat = m_n / h, and works with the residuals x_(j) - m_n of the
order statistics (the middle one is zero and is excluded from log-type
statistics).

Asymptotics are reported in the normalization

    diag(sqrt(n), sqrt(n), sqrt(n) h^{1 - 1/beta_hat}) (theta_hat - theta)
        -> N_3(0, V),

where V is V^log for the log-moment pair and V^p for the fractional-moment
pair; in both cases the (gamma, gamma) entry is
{sigma pi / (2 Gamma(1 + 1/beta))}^2 and the gamma component is
asymptotically independent of the rest.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from .errors import (
    DenominatorNearZero,
    DomainError,
    NonpositiveVarianceGap,
    NoSignChange,
    NotPositiveDefinite,
    RootOutOfBracket,
    ZeroResidual,
)
from .serialize import EstimateReport
from .special_fn import (
    EULER_GAMMA,
    ZETA3,
    RootBracket,
    digamma,
    find_root_monotone,
    log_gamma,
)
from .stable_core import IncrementSample
from .stable_density import median_asymptotic_sd

__all__ = [
    "median_gamma",
    "log_residuals",
    "log_moment_estimate",
    "log_moment_nu",
    "v_log",
    "psi_transform",
    "beta_inv_sq_unbiased",
    "known_scale_beta",
    "c_moment",
    "frac_moment_estimate",
    "v_p",
    "gamma_confidence_interval",
]

_PI2 = math.pi ** 2
_PI4 = math.pi ** 4


def _odd_values(sample: IncrementSample) -> np.ndarray:
    values = sample.values
    if values.size % 2 == 0:
        values = values[:-1]  # drop the last increment in time order
    if values.size < 3:
        raise DomainError("need at least 3 increments", n=int(sample.n))
    return values


def _median_split(values: np.ndarray) -> tuple[float, np.ndarray, int]:
    xs = np.sort(values)
    k = (xs.size - 1) // 2
    return float(xs[k]), np.delete(xs, k), k


def median_gamma(sample: IncrementSample) -> float:
    """Drift estimate gamma_hat = m_n / h from the sample median of the
    increments (even samples drop their last increment)."""
    values = _odd_values(sample)
    m, _, _ = _median_split(values)
    return m / sample.h


def log_residuals(sample: IncrementSample) -> tuple[np.ndarray, float, int]:
    """(log|x_(j) - m_n| over the 2k off-median order statistics, m_n, k).

    Raises ZeroResidual when an off-median increment ties the median, since
    its log residual would be -inf.
    """
    values = _odd_values(sample)
    m, rest, k = _median_split(values)
    res = np.abs(rest - m)
    ties = int(np.count_nonzero(res == 0.0))
    if ties:
        raise ZeroResidual("increments tie the sample median", ties=ties)
    return np.log(res), m, k


class NuMoments(NamedTuple):
    """nu_1..nu_4: mean of log|Y|, then second/third/fourth central moments,
    for Y ~ S_beta(sigma)."""

    nu1: float
    nu2: float
    nu3: float
    nu4: float


def log_moment_nu(beta: float, sigma: float) -> NuMoments:
    """Central moments of log|Y|, Y ~ S_beta(sigma):

    nu1 = C (1/beta - 1) + log sigma          (C = Euler-Mascheroni)
    nu2 = (pi^2/6) (1/beta^2 + 1/2)
    nu3 = 2 zeta(3) (1/beta^3 - 1)
    nu4 = pi^4 {3/(20 beta^4) + 1/(12 beta^2) + 19/240}

    Accepts any beta > 0 so plug-in covariances stay defined when an index
    estimate lands above 2.
    """
    if not beta > 0.0:
        raise DomainError("index beta must be positive", beta=beta)
    if not sigma > 0.0:
        raise DomainError("scale sigma must be positive", sigma=sigma)
    b2 = beta * beta
    return NuMoments(
        EULER_GAMMA * (1.0 / beta - 1.0) + math.log(sigma),
        _PI2 / 6.0 * (1.0 / b2 + 0.5),
        2.0 * ZETA3 * (1.0 / (b2 * beta) - 1.0),
        _PI4 * (3.0 / (20.0 * b2 * b2) + 1.0 / (12.0 * b2) + 19.0 / 240.0),
    )


def v_log(beta: float, sigma: float, log_scale: bool = False) -> np.ndarray:
    """Asymptotic covariance V^log of the log-moment estimates
    (beta_hat, sigma_hat, gamma_hat):

    V_11 = (11/10) beta^2 + (1/2) beta^4 + (13/20) beta^6
    V_12 = (sigma/pi^4) {9 C beta^4 (nu4 - nu2^2) - 3 pi^2 beta^3 nu3}
    V_22 = (sigma^2/pi^4) {9 C^2 beta^2 (nu4 - nu2^2) + pi^4 nu2
                           - 6 C pi^2 beta nu3}
    V_33 = {sigma pi / (2 Gamma(1 + 1/beta))}^2,   V_13 = V_23 = 0.

    With log_scale=True the middle coordinate is log sigma_hat, which
    removes sigma from the upper block.  Raises NotPositiveDefinite when a
    Cholesky factorization of the result fails.
    """
    nu = log_moment_nu(beta, sigma)
    d4 = nu.nu4 - nu.nu2 ** 2
    b2 = beta * beta
    v11 = 1.1 * b2 + 0.5 * b2 * b2 + 0.65 * b2 * b2 * b2
    v12 = sigma / _PI4 * (9.0 * EULER_GAMMA * b2 * b2 * d4
                          - 3.0 * _PI2 * b2 * beta * nu.nu3)
    v22 = sigma * sigma / _PI4 * (9.0 * EULER_GAMMA ** 2 * b2 * d4
                                  + _PI4 * nu.nu2
                                  - 6.0 * EULER_GAMMA * _PI2 * beta * nu.nu3)
    if log_scale:
        v12 /= sigma
        v22 /= sigma * sigma
    v33 = median_asymptotic_sd(beta, sigma) ** 2
    out = np.array([[v11, v12, 0.0], [v12, v22, 0.0], [0.0, 0.0, v33]])
    try:
        np.linalg.cholesky(out)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("log-moment covariance is not positive "
                                  "definite", beta=beta, sigma=sigma) from exc
    return out


def psi_transform(beta: float) -> float:
    """Variance-stabilizing map for the log-moment index estimate:
    sqrt(n) {Psi(beta_hat) - Psi(beta)} -> N(0, 1), where

    Psi(x) = sqrt(5/22) [2 log x
             - log{22 + 5 x^2 + sqrt(22 (22 + 10 x^2 + 13 x^4))}].
    """
    if not beta > 0.0:
        raise DomainError("index beta must be positive", beta=beta)
    x2 = beta * beta
    inner = 22.0 + 5.0 * x2 + math.sqrt(22.0 * (22.0 + 10.0 * x2 + 13.0 * x2 * x2))
    return math.sqrt(5.0 / 22.0) * (2.0 * math.log(beta) - math.log(inner))


def _log_stats(sample: IncrementSample):
    logs, m, k = log_residuals(sample)
    return logs, float(logs.mean()), m, k


def log_moment_estimate(sample: IncrementSample,
                        level: float = 0.95) -> EstimateReport:
    """Log-moment estimates of (beta, sigma, gamma).

    With L_j = log|x_(j) - m_n| over the 2k off-median order statistics and
    Lbar their mean,

        beta_hat  = {(6 / (2k pi^2)) sum (L_j - Lbar)^2 - 1/2}^{-1/2}
        sigma_hat = exp{(1/beta_hat) log(1/h) + Lbar
                        - C (1/beta_hat - 1)}
        gamma_hat = m_n / h.

    The report carries the plug-in V^log covariance and the gamma
    confidence interval at the given level.
    """
    logs, lbar, m, k = _log_stats(sample)
    gap = 6.0 / (2.0 * k * _PI2) * float(np.sum((logs - lbar) ** 2)) - 0.5
    if gap <= 0.0:
        raise NonpositiveVarianceGap("log-residual variance is at most "
                                     "pi^2/12", gap=gap, k=k)
    beta_hat = gap ** -0.5
    h = sample.h
    sigma_hat = math.exp(math.log(1.0 / h) / beta_hat + lbar
                         - EULER_GAMMA * (1.0 / beta_hat - 1.0))
    gamma_hat = m / h
    n_used = 2 * k + 1
    cov = v_log(beta_hat, sigma_hat)
    ci = gamma_confidence_interval(gamma_hat, beta_hat, sigma_hat,
                                   n_used, h, level)
    return EstimateReport(method="log", n=n_used, h=h, beta_hat=beta_hat,
                          sigma_hat=sigma_hat, gamma_hat=gamma_hat,
                          ci_gamma=ci, cov_matrix=cov,
                          extra={"k": k, "level": level})


def beta_inv_sq_unbiased(sample: IncrementSample) -> float:
    """Exactly unbiased estimate of beta^{-2}:

        6 / ((2k - 1) pi^2) sum_j (L_j - Lbar)^2 - 1/2,

    outer divisor 2k - 1 against the inner mean's divisor 2k.  The exact
    unbiasedness comes from the off-median residuals being distributed as
    S_beta(2 h^{1/beta} sigma) draws; the value may be negative in small
    samples and is returned as is.
    """
    logs, lbar, _, k = _log_stats(sample)
    return 6.0 / ((2.0 * k - 1.0) * _PI2) * float(np.sum((logs - lbar) ** 2)) - 0.5


def known_scale_beta(sample: IncrementSample, sigma: float) -> float:
    """Index estimate when sigma is known:

        beta_tilde = {log(1/h) - C} / {log sigma - C - S_n},

    S_n the mean log residual.  Raises DenominatorNearZero when the
    denominator vanishes to working precision.
    """
    if not sigma > 0.0:
        raise DomainError("scale sigma must be positive", sigma=sigma)
    _, lbar, _, _ = _log_stats(sample)
    num = math.log(1.0 / sample.h) - EULER_GAMMA
    den = math.log(sigma) - EULER_GAMMA - lbar
    if abs(den) < 1e-12 * (1.0 + abs(num)):
        raise DenominatorNearZero("known-scale denominator vanishes",
                                  denominator=den)
    return num / den


def c_moment(beta: float, q: float) -> float:
    """Absolute-moment constant of the symmetric stable law:

        C(beta, q) = 2^q Gamma((q+1)/2) Gamma(1 - q/beta)
                     / {sqrt(pi) Gamma(1 - q/2)},

    so E|Y|^q = C(beta, q) sigma^q for Y ~ S_beta(sigma), q in (-1, beta).
    """
    if not (0.0 < beta <= 2.0):
        raise DomainError("index beta must lie in (0, 2]", beta=beta)
    if not (-1.0 < q < beta):
        raise DomainError("moment order q must lie in (-1, beta)",
                          q=q, beta=beta)
    if q == 0.0:
        return 1.0
    return 2.0 ** q * math.exp(log_gamma(0.5 * (q + 1.0))
                               + log_gamma(1.0 - q / beta)
                               - log_gamma(1.0 - 0.5 * q)) / math.sqrt(math.pi)


def _frac_ratio(beta: float, p: float) -> float:
    # C(beta, p)^2 / C(beta, 2p), strictly increasing in beta on (6p, 2)
    return c_moment(beta, p) ** 2 / c_moment(beta, 2.0 * p)


def frac_moment_estimate(sample: IncrementSample, p: float,
                         level: float = 0.95) -> EstimateReport:
    """Fractional-moment estimates of (beta, sigma, gamma) at order p.

    With H_l = (1/n) sum_j |x_j - gamma_hat h|^{lp} over all n increments
    (the median one contributes zero), beta_hat solves

        C(beta, p)^2 / C(beta, 2p) = H_1^2 / H_2

    on the admissible interval (6p, 2), where the left side is strictly
    increasing, and

        sigma_hat = {h^{-p/beta_hat} H_1 / C(beta_hat, p)}^{1/p}.

    Requires p in (0, 1/3); raises RootOutOfBracket when the moment ratio
    falls outside the image of the interval.
    """
    if not (0.0 < p < 1.0 / 3.0):
        raise DomainError("moment order p must lie in (0, 1/3)", p=p)
    values = _odd_values(sample)
    m, _, k = _median_split(values)
    res = np.abs(values - m)
    h1 = float(np.mean(res ** p))
    h2 = float(np.mean(res ** (2.0 * p)))
    if h1 <= 0.0 or h2 <= 0.0:
        raise ZeroResidual("fractional moments vanish", h1=h1, h2=h2)
    target = h1 * h1 / h2
    bracket = RootBracket(6.0 * p + 1e-9, 2.0 - 1e-9)
    try:
        beta_hat = find_root_monotone(lambda b: _frac_ratio(b, p) - target,
                                      bracket)
    except NoSignChange as exc:
        raise RootOutOfBracket("moment ratio outside the admissible index "
                               "interval", target=target, p=p,
                               lo=bracket.lo, hi=bracket.hi) from exc
    h = sample.h
    sigma_hat = (h ** (-p / beta_hat) * h1 / c_moment(beta_hat, p)) ** (1.0 / p)
    gamma_hat = m / h
    n_used = 2 * k + 1
    cov = v_p(beta_hat, sigma_hat, p)
    ci = gamma_confidence_interval(gamma_hat, beta_hat, sigma_hat,
                                   n_used, h, level)
    return EstimateReport(method="frac", n=n_used, h=h, beta_hat=beta_hat,
                          sigma_hat=sigma_hat, gamma_hat=gamma_hat,
                          ci_gamma=ci, cov_matrix=cov,
                          extra={"p": p, "k": k, "level": level})


def v_p(beta: float, sigma: float, p: float) -> np.ndarray:
    """Asymptotic covariance V^p of the fractional-moment estimates at
    order p.  Writing C(q) = C(beta, q) and

        eta = psi(1 - p/beta) - psi(1 - 2p/beta),

    the closed forms are

    V_11 = beta^4 / (p^2 eta^2) {C(2p)/C(p)^2 - C(3p)/(C(p) C(2p))
           + (1/4)(C(4p)/C(2p)^2 - 1)}
    V_12 = beta^2 sigma / (p^2 eta^2)
           {psi(1-2p/beta) [C(3p)/(2 C(p) C(2p)) - C(2p)/C(p)^2 + 1/2]
            + psi(1-p/beta) [C(3p)/(2 C(p) C(2p)) - C(4p)/(4 C(2p)^2) - 1/4]}
    V_22 = sigma^2 / (p^2 eta^2)
           {psi(1-2p/beta)^2 [C(2p)/C(p)^2 - 1]
            - psi(1-p/beta) psi(1-2p/beta) [C(3p)/(C(p) C(2p)) - 1]
            + (1/4) psi(1-p/beta)^2 [C(4p)/C(2p)^2 - 1]}

    with V_13 = V_23 = 0 and V_33 = {sigma pi / (2 Gamma(1 + 1/beta))}^2.
    Requires 4p < beta so that C(4p) exists.
    """
    if not (0.0 < p < 0.5):
        raise DomainError("moment order p must lie in (0, 1/2)", p=p)
    if not (4.0 * p < beta):
        raise DomainError("covariance needs moments to order 4p < beta",
                          p=p, beta=beta)
    if not sigma > 0.0:
        raise DomainError("scale sigma must be positive", sigma=sigma)
    psi1 = digamma(1.0 - p / beta)
    psi2 = digamma(1.0 - 2.0 * p / beta)
    eta = psi1 - psi2
    cp = c_moment(beta, p)
    c2p = c_moment(beta, 2.0 * p)
    c3p = c_moment(beta, 3.0 * p)
    c4p = c_moment(beta, 4.0 * p)
    r21 = c2p / cp ** 2
    r312 = c3p / (cp * c2p)
    r42 = c4p / c2p ** 2
    base = 1.0 / (p * p * eta * eta)
    b2 = beta * beta
    v11 = b2 * b2 * base * (r21 - r312 + 0.25 * (r42 - 1.0))
    v12 = b2 * sigma * base * (psi2 * (0.5 * r312 - r21 + 0.5)
                               + psi1 * (0.5 * r312 - 0.25 * r42 - 0.25))
    v22 = sigma * sigma * base * (psi2 * psi2 * (r21 - 1.0)
                                  - psi1 * psi2 * (r312 - 1.0)
                                  + 0.25 * psi1 * psi1 * (r42 - 1.0))
    v33 = median_asymptotic_sd(beta, sigma) ** 2
    return np.array([[v11, v12, 0.0], [v12, v22, 0.0], [0.0, 0.0, v33]])


def gamma_confidence_interval(gamma_hat: float, beta_hat: float,
                              sigma_hat: float, n: int, h: float,
                              level: float = 0.95) -> tuple[float, float]:
    """Two-sided drift interval at confidence level `level` (e.g. 0.95):

        gamma_hat -+ z_{(1+level)/2} sigma_hat pi / {2 Gamma(1 + 1/beta_hat)
                    sqrt(n) h^{1 - 1/beta_hat}}.
    """
    if not (0.0 < level < 1.0):
        raise DomainError("level must lie in (0, 1)", level=level)
    if n < 1 or not h > 0.0:
        raise DomainError("need n >= 1 and h > 0", n=n, h=h)
    z = float(ndtri(0.5 * (1.0 + level)))
    half = z * median_asymptotic_sd(beta_hat, sigma_hat) / (
        math.sqrt(n) * h ** (1.0 - 1.0 / beta_hat))
    return gamma_hat - half, gamma_hat + half
