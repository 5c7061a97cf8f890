"""Unit tests for profile families, admissible pairs and identity residuals."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammainc

from entform.profiles import (
    PHI_AT_ZERO,
    PHI_TAIL_CONSTANT,
    AdmissiblePair,
    dilation_telescoping_residual,
    fourier_identity_residual,
    gaussian_deriv_profile,
    gaussian_pair,
    gaussian_profile,
    make_square_function_pair,
    phi_superposition,
    shifted_packet_profile,
    transform_convention_residual,
    vartheta_profile,
    vartheta_sq_profile,
)

TS = np.linspace(0.25, 4.0, 33)
TAUS = np.linspace(-4.0, 4.0, 33)


@pytest.fixture(scope="module")
def sq_pair() -> AdmissiblePair:
    return make_square_function_pair()


# -- gaussian pairs ---------------------------------------------------------------

def test_gaussian_point_values():
    g = gaussian_profile(1.0)
    assert g(0.0) == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-12)
    for alpha in (1.0, 2.0, 5.0):
        h = gaussian_deriv_profile(alpha)
        assert h(0.0) == 0.0
        # Odd function.
        assert h(1.3) == pytest.approx(-h(-1.3), rel=1e-14)


def test_gaussian_profile_rejects_bad_width():
    with pytest.raises(ValueError):
        gaussian_profile(0.0)
    with pytest.raises(ValueError):
        gaussian_pair(-1.0)


def test_gaussian_pair_identity_closed_form():
    for alpha in (1.0, 2.0, 5.0):
        res = fourier_identity_residual(gaussian_pair(alpha), TS, TAUS)
        assert res <= 1e-10


def test_gaussian_pair_identity_finite_differences():
    res = fourier_identity_residual(gaussian_pair(1.0), TS, TAUS, method="fd")
    assert res <= 1e-6


def test_gaussian_transform_convention_cross_check():
    # |sigma_hat|^2 from the closed form vs a direct Riemann transform of the
    # sampled profile; guards the e^(-2 pi i x xi) convention.
    res = transform_convention_residual(gaussian_pair(1.0), np.linspace(-4, 4, 65))
    assert res <= 1e-10


def test_gaussian_mass_and_antiderivative():
    g = gaussian_profile(2.0)
    val, _ = quad(g.func, -30, 30)
    assert val == pytest.approx(1.0, abs=1e-10)
    assert g.antideriv(30.0) == pytest.approx(1.0, abs=1e-12)
    h = gaussian_deriv_profile(2.0)
    assert h.antideriv(0.0) == pytest.approx(2.0 * g(0.0), rel=1e-12)


# -- square-function pair -----------------------------------------------------------

def test_square_pair_hat_support_and_plateau(sq_pair):
    assert abs(sq_pair.phi_hat(2.0)) <= 1e-10
    assert abs(sq_pair.phi_hat(-2.0)) <= 1e-10
    v0 = sq_pair.phi_hat(0.0)
    v1 = sq_pair.phi_hat(1.0)
    assert v0 > 0
    assert v0 == pytest.approx(v1, rel=1e-12)
    # Direct quadrature of the tail integral as independent oracle.
    direct, _ = quad(lambda s: sq_pair.psi_hat(s) ** 2 / s, 1.0, 2.0, epsabs=1e-16)
    assert v0 == pytest.approx(math.sqrt(direct), rel=1e-8)


def test_square_pair_hat_evenness(sq_pair):
    xi = np.linspace(0.0, 3.0, 301)
    assert np.allclose(sq_pair.rho_hat_sq(xi), sq_pair.rho_hat_sq(-xi), atol=0)
    assert np.allclose(sq_pair.sigma_hat_sq(xi), sq_pair.sigma_hat_sq(-xi), atol=0)


def test_square_pair_identity_finite_differences(sq_pair):
    res = fourier_identity_residual(sq_pair, TS, TAUS, method="fd")
    assert res <= 1e-6


def test_square_pair_spatial_profiles_even_and_decaying(sq_pair):
    xs = np.array([0.5, 1.0, 3.7, 9.2])
    assert np.allclose(sq_pair.rho(xs), sq_pair.rho(-xs), atol=1e-15)
    assert np.allclose(sq_pair.sigma(xs), sq_pair.sigma(-xs), atol=1e-15)
    peak = abs(sq_pair.rho(0.0))
    assert abs(sq_pair.rho(30.0)) <= 1e-7 * peak
    assert abs(sq_pair.sigma(30.0)) <= 1e-7 * abs(sq_pair.sigma(0.0))


def test_square_pair_transform_convention(sq_pair):
    res = transform_convention_residual(sq_pair, np.linspace(-4, 4, 65))
    assert res <= 1e-8


# -- the slow superposition ----------------------------------------------------------

def test_superposition_at_zero():
    assert phi_superposition(0.0) == pytest.approx(PHI_AT_ZERO, rel=1e-8)


def test_superposition_tail_constant():
    assert 50.0**20 * phi_superposition(50.0) == pytest.approx(PHI_TAIL_CONSTANT, rel=0.01)


def test_superposition_strictly_decreasing():
    xs = np.linspace(0.0, 8.0, 33)
    vals = phi_superposition(xs)
    assert np.all(np.diff(vals) < 0)


def test_superposition_incomplete_gamma_oracle():
    # Phi(x) = x^(-20) * (Gamma(10)/2) * P(10, x^2) with P the regularized
    # lower incomplete gamma; independent of the quadrature path.
    for x in (0.5, 1.0, 2.5, 7.0):
        expected = x**-20.0 * PHI_TAIL_CONSTANT * gammainc(10, x * x)
        assert phi_superposition(x) == pytest.approx(expected, rel=1e-8)


# -- dilation telescoping --------------------------------------------------------------

def test_dilation_telescoping_gaussian_profiles():
    xs = np.linspace(-8.0, 8.0, 65)
    for prof in (gaussian_profile(1.0), gaussian_profile(2.0), gaussian_deriv_profile(1.0)):
        for k in (-1, 0, 2):
            assert dilation_telescoping_residual(prof, k, xs * 2.0**k, steps=64) <= 1e-6


def test_dilation_telescoping_square_and_decay_profiles(sq_pair):
    xs = np.linspace(-8.0, 8.0, 65)
    for prof in (sq_pair.rho, sq_pair.sigma, vartheta_profile(), vartheta_sq_profile()):
        assert dilation_telescoping_residual(prof, 0, xs, steps=64) <= 1e-6


# -- packets and weights ------------------------------------------------------------------

def test_shifted_packet_profile_values():
    g = gaussian_profile(1.0)
    pkt = shifted_packet_profile(g, 1.0, 25)
    w = 2.0**-25
    assert pkt(1.0) == pytest.approx(w * g(0.0), rel=1e-14)
    assert pkt(0.0) == pytest.approx(w * g(-1.0), rel=1e-14)
    assert pkt.antideriv(40.0) == pytest.approx(w, rel=1e-10)


def test_dilated_weights_exact_cell_integrals():
    vt = vartheta_profile()
    h, t = 1.0 / 16.0, 0.25
    offs = np.arange(-512, 512) * h
    w = vt.dilated_weights(offs, t, h)
    # Each weight is the exact integral of the dilated kernel over its cell.
    for i in (0, 511, 512, 600):
        lo, hi = offs[i] - h / 2, offs[i] + h / 2
        direct, _ = quad(lambda u: vt.func(u / t) / t, lo, hi, epsabs=1e-15)
        assert w[i] == pytest.approx(direct, abs=1e-13)
    # The sum misses only the analytic tails beyond the covered range.
    tail = (1.0 + (offs[-1] + h / 2) / t) ** -3 / 3 + (1.0 - (offs[0] - h / 2) / t) ** -3 / 3
    assert abs(w.sum() - 2.0 / 3.0) == pytest.approx(tail, rel=1e-10)
    # Point-sampled fallback for a smooth profile integrates to the mass too.
    g = gaussian_profile(1.0)
    wg = g.dilated_weights(offs, 1.0, h)
    assert wg.sum() == pytest.approx(1.0, rel=1e-8)
