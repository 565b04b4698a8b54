"""Impairment model tests: distortion covariance, Von Mises sampling,
phase-noise autocorrelation."""

import numpy as np
import pytest

from ristx.impairments import (
    ImpairmentParams,
    phase_autocorrelation,
    sample_phase_factors,
    sample_phase_noise,
    tx_distortion_cov,
)
from ristx.linalg import bessel_i_ratio


class TestImpairmentParams:
    def test_rho_cached_from_concentration(self):
        p = ImpairmentParams(kappa_s=0.1, kappa_d=0.05, concentration=5.0)
        assert p.rho == pytest.approx(bessel_i_ratio(5.0), abs=1e-12)

    def test_infinite_concentration_is_ideal(self):
        p = ImpairmentParams(kappa_s=0.0, kappa_d=0.0, concentration=float("inf"))
        assert p.rho == 1.0

    def test_explicit_rho_must_match(self):
        ImpairmentParams(kappa_s=0.0, kappa_d=0.0, concentration=5.0, rho=bessel_i_ratio(5.0))
        with pytest.raises(ValueError):
            ImpairmentParams(kappa_s=0.0, kappa_d=0.0, concentration=5.0, rho=0.5)

    @pytest.mark.parametrize("bad", [-0.01, 1.0, 1.5])
    def test_kappa_range(self, bad):
        with pytest.raises(ValueError):
            ImpairmentParams(kappa_s=bad, kappa_d=0.0, concentration=1.0)
        with pytest.raises(ValueError):
            ImpairmentParams(kappa_s=0.0, kappa_d=bad, concentration=1.0)

    def test_zero_kappas_admitted(self):
        p = ImpairmentParams(kappa_s=0.0, kappa_d=0.0, concentration=0.0)
        assert p.rho == 0.0


class TestTxDistortionCov:
    def test_zero_precoder(self):
        cov = tx_distortion_cov(np.zeros((4, 2), dtype=complex), 0.1)
        assert np.all(cov == 0)

    def test_identity_precoder(self):
        cov = tx_distortion_cov(np.eye(3, dtype=complex), 0.1)
        assert np.allclose(cov, 0.1 * np.eye(3), atol=1e-15)

    def test_trace_frobenius_identity(self, rng):
        w = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        cov = tx_distortion_cov(w, 0.07)
        assert np.trace(cov).real == pytest.approx(
            0.07 * np.linalg.norm(w) ** 2, rel=1e-12
        )
        # diagonal and PSD
        assert np.allclose(cov, np.diag(np.diagonal(cov)))
        assert np.all(np.diagonal(cov).real >= 0)

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            tx_distortion_cov(np.eye(2), -0.1)


class TestSamplePhaseNoise:
    def test_uniform_at_zero_concentration(self, rng):
        eps = sample_phase_noise(0.0, 1_000_000, rng)
        resultant = np.abs(np.mean(np.exp(1j * eps)))
        assert resultant <= 0.004  # 3-sigma bound for 1e6 uniform phases

    def test_mean_cosine_matches_bessel_ratio(self, rng):
        eps = sample_phase_noise(5.0, 1_000_000, rng)
        assert np.mean(np.cos(eps)) == pytest.approx(bessel_i_ratio(5.0), abs=0.003)

    def test_mean_sine_vanishes(self, rng):
        eps = sample_phase_noise(20.0, 1_000_000, rng)
        assert abs(np.mean(np.sin(eps))) <= 0.003

    def test_support(self, rng):
        for kappa in (0.0, 0.3, 8.0):
            eps = sample_phase_noise(kappa, 10_000, rng)
            assert np.all(eps > -np.pi - 1e-12) and np.all(eps <= np.pi + 1e-12)

    def test_infinite_concentration_zero_noise(self, rng):
        assert np.all(sample_phase_noise(float("inf"), 100, rng) == 0.0)

    def test_negative_concentration_rejected(self, rng):
        with pytest.raises(ValueError):
            sample_phase_noise(-1.0, 10, rng)

    def test_histogram_matches_density(self, rng):
        # coarse chi-square-style check against the unnormalized density
        kappa = 3.0
        eps = sample_phase_noise(kappa, 400_000, rng)
        hist, edges = np.histogram(eps, bins=60, range=(-np.pi, np.pi), density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        density = np.exp(kappa * np.cos(centers))
        density /= np.trapezoid(density, centers)
        assert np.max(np.abs(hist - density)) <= 0.02 * density.max()


class TestSamplePhaseFactors:
    def test_unit_modulus(self, rng):
        f = sample_phase_factors(4.0, 10_000, rng)
        assert np.max(np.abs(np.abs(f) - 1.0)) <= 1e-12

    def test_mean_is_bessel_ratio(self, rng):
        f = sample_phase_factors(12.0, 1_000_000, rng)
        assert np.mean(f).real == pytest.approx(bessel_i_ratio(12.0), abs=0.003)
        assert abs(np.mean(f).imag) <= 0.003

    def test_ideal_hardware(self, rng):
        assert np.all(sample_phase_factors(float("inf"), 17, rng) == 1.0)


class TestPhaseAutocorrelation:
    def test_rho_one_identity(self, rng):
        pi = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.allclose(phase_autocorrelation(pi, 1.0), pi, atol=1e-15)

    def test_rho_zero_keeps_diagonal_only(self, rng):
        pi = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.allclose(phase_autocorrelation(pi, 0.0), np.diag(np.diagonal(pi)), atol=1e-15)

    def test_diagonal_preserved_exactly(self, rng):
        pi = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        out = phase_autocorrelation(pi, 0.7)
        assert np.allclose(np.diagonal(out), np.diagonal(pi), atol=1e-15)

    def test_hermitian_preserved(self, rng):
        pi = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        pi = 0.5 * (pi + pi.conj().T)
        out = phase_autocorrelation(pi, 0.4)
        assert np.linalg.norm(out - out.conj().T) <= 1e-14 * np.linalg.norm(out)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            phase_autocorrelation(np.ones((2, 3)), 0.5)

    def test_matches_monte_carlo(self, rng):
        # E[Theta_hat Pi Theta_hat^H] over 1e5 Von Mises draws, 1% Frobenius
        m, draws, conc = 5, 100_000, 10.0
        rho = bessel_i_ratio(conc)
        pi = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        factors = sample_phase_factors(conc, draws * m, rng).reshape(draws, m)
        acc = np.einsum("si,ij,sj->ij", factors, pi, factors.conj()) / draws
        expected = phase_autocorrelation(pi, rho)
        rel = np.linalg.norm(acc - expected) / np.linalg.norm(expected)
        assert rel <= 0.01

    def test_mean_phase_matrix_is_rho_identity(self, rng):
        # E[Theta_hat] -> rho * I
        m, draws, conc = 6, 200_000, 5.0
        factors = sample_phase_factors(conc, draws * m, rng).reshape(draws, m)
        mean_diag = factors.mean(axis=0)
        assert np.max(np.abs(mean_diag - bessel_i_ratio(conc))) <= 0.01
