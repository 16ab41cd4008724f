"""Gamma and inverse-Gaussian subordinators: sampling, maximum likelihood,
moment estimation, Fisher matrices.

Laws of the increments over mesh h:

    gamma subordinator   L(X_t) = Gamma(delta t, gamma)       (rate gamma),
    IG subordinator      L(X_t) = IG(delta t, gamma), density
        (delta t e^{delta t gamma} / sqrt(2 pi)) x^{-3/2}
            exp{-(gamma^2 x + (delta t)^2 / x) / 2},  x > 0.

The IG law coincides with the Wald law of mean delta t / gamma and shape
(delta t)^2, which is how it is sampled; gamma draws boost tiny shapes
through the Ahrens-Dieter identity inside numpy's standard_gamma.

Rates: sqrt(n)(delta_hat - delta) and sqrt(T)(gamma_hat - gamma) are the
natural normalizations, with per-observation Fisher information
diag(1/delta^2, delta/gamma^2) for the gamma law and
diag(2/delta^2, delta/gamma) for the IG law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, NonpositiveBrace, NonpositiveK
from .special_fn import RootBracket, digamma, find_root_monotone
from .stable_core import IncrementSample, _as_rng

__all__ = [
    "GammaSubParams",
    "IGSubParams",
    "sample_gamma_sub",
    "sample_ig_sub",
    "gamma_mle",
    "gamma_moment_estimate",
    "ig_mle",
    "gamma_fisher",
    "ig_fisher",
]


@dataclass(frozen=True)
class GammaSubParams:
    """Gamma subordinator: L(X_t) = Gamma(delta t, gamma_rate)."""

    delta: float
    gamma_rate: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise DomainError("shape rate delta must be positive",
                              delta=self.delta)
        if not self.gamma_rate > 0.0:
            raise DomainError("rate gamma must be positive",
                              gamma_rate=self.gamma_rate)


@dataclass(frozen=True)
class IGSubParams:
    """Inverse-Gaussian subordinator: L(X_t) = IG(delta t, gamma_ig)."""

    delta: float
    gamma_ig: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise DomainError("shape rate delta must be positive",
                              delta=self.delta)
        if not self.gamma_ig > 0.0:
            raise DomainError("rate gamma must be positive",
                              gamma_ig=self.gamma_ig)


def _check_mesh(h: float, n: int, shape: float):
    if not h > 0.0:
        raise DomainError("mesh h must be positive", h=h)
    if n < 1:
        raise DomainError("sample size n must be >= 1", n=n)
    if shape < 1e-12:
        warnings.warn("per-increment shape below 1e-12: draws are "
                      "numerically degenerate at this mesh")


def sample_gamma_sub(params: GammaSubParams, h: float, n: int,
                     seed=None) -> IncrementSample:
    """n i.i.d. Gamma(delta h, gamma) increments."""
    _check_mesh(h, n, params.delta * h)
    rng = _as_rng(seed)
    values = rng.gamma(params.delta * h, scale=1.0 / params.gamma_rate, size=n)
    meta = {"model": "gamma_sub", "delta": params.delta,
            "gamma": params.gamma_rate}
    return IncrementSample(values, h, meta)


def sample_ig_sub(params: IGSubParams, h: float, n: int,
                  seed=None) -> IncrementSample:
    """n i.i.d. IG(delta h, gamma) increments, drawn as Wald variates of
    mean delta h / gamma and shape (delta h)^2."""
    _check_mesh(h, n, params.delta * h)
    rng = _as_rng(seed)
    dh = params.delta * h
    values = rng.wald(dh / params.gamma_ig, dh * dh, size=n)
    meta = {"model": "ig_sub", "delta": params.delta,
            "gamma": params.gamma_ig}
    return IncrementSample(values, h, meta)


def _positive_increments(sample: IncrementSample) -> np.ndarray:
    values = sample.values
    if np.any(values <= 0.0):
        raise DataError("subordinator increments must be strictly positive",
                        nonpositive=int(np.count_nonzero(values <= 0.0)))
    return values


def gamma_mle(sample: IncrementSample) -> tuple[float, float]:
    """Gamma-subordinator MLE (delta_hat, gamma_hat).

    With T = n h, X_T = sum of increments and

        K = T log(X_T / T) - sum_j h log(Delta_j X / h),

    delta_hat is the unique root of n h {log(delta h) - psi(delta h)} = K:
    the left side decreases strictly from +inf (delta -> 0) to 0
    (delta -> inf), and K > 0 by strict concavity of the logarithm unless
    all increments are equal (NonpositiveK).  Then
    gamma_hat = delta_hat T / X_T.  The bracket expands geometrically from
    delta_0 = exp(-K / (n h)) / h until it straddles the root.
    """
    values = _positive_increments(sample)
    h = sample.h
    n = values.size
    t_total = n * h
    x_total = float(values.sum())
    k_stat = (t_total * math.log(x_total / t_total)
              - h * float(np.sum(np.log(values / h))))
    if k_stat <= 0.0:
        raise NonpositiveK("likelihood statistic K is nonpositive: all "
                           "increments equal", K=k_stat)

    def gap(delta: float) -> float:
        return t_total * (math.log(delta * h) - digamma(delta * h)) - k_stat

    lo = hi = math.exp(-k_stat / t_total) / h
    if gap(lo) == 0.0:
        delta_hat = lo
    else:
        for _ in range(200):
            if gap(lo) > 0.0:
                break
            lo /= 8.0
        for _ in range(200):
            if gap(hi) < 0.0:
                break
            hi *= 8.0
        delta_hat = find_root_monotone(gap, RootBracket(lo, hi))
    gamma_hat = delta_hat * t_total / x_total
    return delta_hat, gamma_hat


def gamma_moment_estimate(sample: IncrementSample
                          ) -> tuple[float, float, np.ndarray]:
    """Gamma-subordinator moment estimates and their covariance.

    With m1 = (1/T) sum Delta X and m2 = (1/T) sum (Delta X)^2:
    gamma_hat = m1/m2, delta_hat = m1^2/m2, and the attached asymptotic
    covariance of (delta_hat, gamma_hat) is

        [[2 delta, 2 gamma], [2 gamma, 3 gamma^2 / delta]] / T

    evaluated at the estimates.  The drift estimate is 1/3 as efficient as
    the MLE's gamma component.
    """
    values = _positive_increments(sample)
    t_total = values.size * sample.h
    m1 = float(values.sum()) / t_total
    m2 = float(np.sum(values ** 2)) / t_total
    if m2 <= 0.0:
        raise DataError("second empirical moment vanishes", m2=m2)
    gamma_hat = m1 / m2
    delta_hat = m1 * m1 / m2
    cov = np.array([[2.0 * delta_hat, 2.0 * gamma_hat],
                    [2.0 * gamma_hat, 3.0 * gamma_hat ** 2 / delta_hat]])
    return delta_hat, gamma_hat, cov / t_total


def ig_mle(sample: IncrementSample) -> tuple[float, float]:
    """IG-subordinator MLE:

        delta_hat = {(1/n)(sum_j h^2 / Delta_j X - T^2 / X_T)}^{-1/2},
        gamma_hat = delta_hat T / X_T.

    The braced mean is nonnegative by Cauchy-Schwarz and vanishes only when
    all increments are equal (NonpositiveBrace).
    """
    values = _positive_increments(sample)
    h = sample.h
    n = values.size
    t_total = n * h
    x_total = float(values.sum())
    brace = (h * h * float(np.sum(1.0 / values))
             - t_total * t_total / x_total) / n
    if brace <= 0.0:
        raise NonpositiveBrace("shape expression is nonpositive: all "
                               "increments equal", brace=brace)
    delta_hat = brace ** -0.5
    gamma_hat = delta_hat * t_total / x_total
    return delta_hat, gamma_hat


def gamma_fisher(params: GammaSubParams) -> np.ndarray:
    """Per-observation Fisher information diag(1/delta^2, delta/gamma^2) in
    the normalization (sqrt(n)(delta_hat - delta), sqrt(T)(gamma_hat - gamma))."""
    return np.diag([1.0 / params.delta ** 2,
                    params.delta / params.gamma_rate ** 2])


def ig_fisher(params: IGSubParams) -> np.ndarray:
    """Per-observation Fisher information diag(2/delta^2, delta/gamma) in
    the normalization (sqrt(n)(delta_hat - delta), sqrt(T)(gamma_hat - gamma))."""
    return np.diag([2.0 / params.delta ** 2,
                    params.delta / params.gamma_ig])
