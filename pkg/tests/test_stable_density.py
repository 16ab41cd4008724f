"""Symmetric stable density, derivatives and Fisher information."""

import math

import numpy as np
import pytest
import scipy.integrate

from levyestim.errors import DomainError
from levyestim.special_fn import log_gamma
from levyestim.stable_density import (
    FisherInfo,
    density_grid,
    fisher_matrix,
    h_beta,
    m_beta,
    median_asymptotic_sd,
    phi,
    phi_deriv,
    phi_zero,
)

# regression values for the information integrals (quadrature, frozen)
H_BETA_15 = 0.9555597382722596
M_BETA_15 = 0.4280969796150823


def test_cauchy_closed_form():
    # beta = 1 is exactly Cauchy: phi(y) = 1/(pi (1 + y^2))
    assert abs(phi(0.0, 1.0) - 1 / np.pi) < 1e-8
    for y in (0.5, 1.0, 2.0, 10.0):
        assert phi(y, 1.0) == pytest.approx(1 / (np.pi * (1 + y * y)), abs=1e-10)
        exact_d1 = -2 * y / (np.pi * (1 + y * y) ** 2)
        assert phi_deriv(y, 1.0, 1) == pytest.approx(exact_d1, abs=1e-10)
        exact_d2 = (6 * y * y - 2) / (np.pi * (1 + y * y) ** 3)
        assert phi_deriv(y, 1.0, 2) == pytest.approx(exact_d2, abs=1e-10)


def test_phi_zero_formula():
    for beta in (0.6, 1.0, 1.5, 1.9):
        exact = math.exp(log_gamma(1 + 1 / beta)) / np.pi
        assert abs(phi(0.0, beta) - exact) < 1e-10
        assert abs(phi_zero(beta, 1.0) - exact) < 1e-14
        assert abs(phi_zero(beta, 2.0) - exact / 2) < 1e-14


@pytest.mark.parametrize("beta", [0.6, 1.0, 1.5, 1.9])
def test_normalization(beta):
    # quadrature over [0, 50] plus the tail integral from the asymptotic
    # series, term-wise integrable in closed form
    core, _ = scipy.integrate.quad(lambda y: phi(y, beta), 0, 50,
                                   epsabs=1e-12, epsrel=1e-10, limit=300)
    tail = 0.0
    for m in range(1, 9):
        coef = ((-1) ** (m + 1) / np.pi * math.exp(log_gamma(1 + m * beta))
                / math.factorial(m) * math.sin(m * np.pi * beta / 2))
        tail += coef * 50.0 ** (-m * beta) / (m * beta)
    assert abs(2 * (core + tail) - 1.0) < 1e-6


def test_gaussian_limit():
    # beta -> 2 continuity against N(0, 2)
    for y in (0.0, 1.0, 2.0):
        normal = math.exp(-y * y / 4) / math.sqrt(4 * np.pi)
        assert abs(phi(y, 1.99) - normal) < 2e-2


@pytest.mark.parametrize("beta", [0.8, 1.5])
@pytest.mark.parametrize("y", [0.5, 2.0, 10.0])
def test_derivative_finite_difference(beta, y):
    eps = 1e-5
    fd1 = (phi(y + eps, beta) - phi(y - eps, beta)) / (2 * eps)
    assert phi_deriv(y, beta, 1) == pytest.approx(fd1, rel=1e-5, abs=1e-9)
    fd2 = (phi_deriv(y + eps, beta, 1) - phi_deriv(y - eps, beta, 1)) / (2 * eps)
    assert phi_deriv(y, beta, 2) == pytest.approx(fd2, rel=1e-5, abs=1e-9)


@pytest.mark.parametrize("beta", [0.6, 1.0, 1.5])
def test_tail_ratio_stabilizes(beta):
    # phi(y) y^{1+beta} approaches a positive constant; monitor its
    # stabilization between y = 20 and y = 40 rather than its exact value
    lead = (math.exp(log_gamma(1 + beta)) / np.pi
            * math.sin(np.pi * beta / 2))
    r20 = phi(20.0, beta) * 20.0 ** (1 + beta)
    r40 = phi(40.0, beta) * 40.0 ** (1 + beta)
    assert r20 > 0 and r40 > 0
    assert abs(r40 / r20 - 1.0) < 0.1
    # and the limit constant is the first series coefficient
    assert abs(r40 / lead - 1.0) < 0.1


def test_symmetry_and_parity():
    for beta in (0.7, 1.4):
        for y in (0.3, 1.7, 35.0):
            assert phi(-y, beta) == phi(y, beta)
            assert phi_deriv(-y, beta, 1) == -phi_deriv(y, beta, 1)
            assert phi_deriv(-y, beta, 2) == phi_deriv(y, beta, 2)
    assert phi_deriv(0.0, 1.3, 1) == 0.0


def test_scale_family():
    for sigma in (0.5, 2.0):
        for y in (0.4, 3.0):
            assert phi(y, 1.5, sigma) == pytest.approx(
                phi(y / sigma, 1.5) / sigma, rel=1e-12)
            assert phi_deriv(y, 1.5, 1, sigma) == pytest.approx(
                phi_deriv(y / sigma, 1.5, 1) / sigma ** 2, rel=1e-12)


def test_information_integrals_cauchy():
    # H_1 = M_1 = 1/2 analytically
    assert abs(h_beta(1.0) - 0.5) < 1e-5
    assert abs(m_beta(1.0) - 0.5) < 1e-5


def test_information_integrals_frozen():
    assert h_beta(1.5) == pytest.approx(H_BETA_15, rel=1e-6)
    assert m_beta(1.5) == pytest.approx(M_BETA_15, rel=1e-6)


def test_fisher_matrix_structure():
    info = fisher_matrix(1.5, 0.7)
    m = info.matrix
    assert m.shape == (3, 3)
    assert np.allclose(m, m.T, rtol=0, atol=0)
    h, mm = info.h_value, info.m_value
    assert m[0, 0] == pytest.approx(h / 1.5 ** 4, rel=1e-12)
    assert m[0, 1] == pytest.approx(h / (0.7 * 1.5 ** 2), rel=1e-12)
    assert m[1, 1] == pytest.approx(h / 0.7 ** 2, rel=1e-12)
    assert m[2, 2] == pytest.approx(mm / 0.7 ** 2, rel=1e-12)
    assert m[0, 2] == m[1, 2] == 0.0
    # rank-one (beta, sigma) block: determinant is identically zero
    assert info.top_left_det() == 0.0
    assert abs(np.linalg.det(m[:2, :2])) < 1e-12 * m[0, 0] * m[1, 1]


def test_fisher_cauchy_values():
    m = fisher_matrix(1.0, 1.0).matrix
    assert np.allclose(m, np.array([[0.5, 0.5, 0.0],
                                    [0.5, 0.5, 0.0],
                                    [0.0, 0.0, 0.5]]), atol=1e-5)


def test_median_asymptotic_sd():
    assert median_asymptotic_sd(1.0, 1.0) == pytest.approx(np.pi / 2, rel=1e-14)
    assert median_asymptotic_sd(1.0, 0.5) == pytest.approx(np.pi / 4, rel=1e-14)
    # 1 / (2 phi(0)) identity
    for beta in (0.8, 1.6):
        assert median_asymptotic_sd(beta, 1.0) == pytest.approx(
            1 / (2 * phi_zero(beta, 1.0)), rel=1e-12)


def test_density_grid():
    g = density_grid(1.5, np.linspace(-1, 1, 5), 1.0)
    assert g.density.shape == (5,)
    assert np.all(g.density > 0)
    assert g.deriv[2] == pytest.approx(0.0, abs=1e-12)


def test_domain_errors_and_far_tail_warning():
    with pytest.raises(DomainError):
        phi(0.0, 0.4)
    with pytest.raises(DomainError):
        phi(0.0, 2.0)
    with pytest.raises(DomainError):
        phi(0.0, 1.5, -1.0)
    with pytest.raises(DomainError):
        phi_deriv(1.0, 1.5, 3)
    with pytest.warns(UserWarning):
        val = phi(51.0, 1.5)
    assert val > 0
