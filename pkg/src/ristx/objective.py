"""Analytic evaluation of the system MSE.

The full phase-noise-averaged MSE expansion with every impairment
family broken out, plus the quadratic form (Xi, Q) the phase-shift
subproblem minimizes. The physically-simulated Monte Carlo estimate of
the same quantity lives in ``montecarlo.py``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig, TransceiverState

__all__ = [
    "MseBreakdown",
    "PhaseQuadratic",
    "effective_channel",
    "analytic_mse",
    "build_phase_quadratic",
    "nmse",
]


class NumericEvaluationError(ArithmeticError):
    """A non-finite value appeared while evaluating a named MSE term."""


@dataclass(frozen=True)
class MseBreakdown:
    """The MSE split into its term families.

    ``total`` is the optimized objective and excludes ``y_term``, the
    kappa_s*kappa_d cross-distortion contribution that the design drops;
    ``total + y_term`` is the exact physical MSE that the Monte Carlo
    estimator converges to.
    """

    total: float
    signal_term: float
    phase_noise_term: float
    tx_distortion_terms: float
    rx_distortion_terms: float
    cross_terms: float
    awgn_term: float
    constant_term: float
    y_term: float


@dataclass(frozen=True)
class PhaseQuadratic:
    """Data of the phase subproblem f(theta) = theta^H Xi theta + 2 rho Re{theta^H q}.

    ``omega``, ``psi``, ``t_vec``, ``v_vec`` are the diagonals the linear
    coefficient is assembled from (q = omega* + kappa_s psi* + kappa_d t* - v*).
    ``constant`` is the theta-independent remainder: full MSE =
    f(theta) + constant for any unit-modulus theta.
    """

    xi: np.ndarray
    q: np.ndarray
    omega: np.ndarray
    psi: np.ndarray
    t_vec: np.ndarray
    v_vec: np.ndarray
    constant: float


def effective_channel(channels: ChannelSet, phases: np.ndarray, rho: float) -> np.ndarray:
    """Mean combined channel H_d^H + rho * H_r^H diag(theta) H_t."""
    h_d_h = channels.h_d.conj().T
    h_r_h = channels.h_r.conj().T
    if channels.h_t.shape[1] != h_d_h.shape[1] or h_r_h.shape[1] != channels.h_t.shape[0]:
        raise ValueError(
            f"inconsistent channel shapes: h_d {channels.h_d.shape}, "
            f"h_r {channels.h_r.shape}, h_t {channels.h_t.shape}"
        )
    phases = np.asarray(phases)
    if phases.shape != (channels.h_t.shape[0],):
        raise ValueError(f"phases shape {phases.shape} != ({channels.h_t.shape[0]},)")
    return h_d_h + rho * (h_r_h * phases[None, :]) @ channels.h_t


def _real_trace(a: np.ndarray) -> float:
    return float(np.trace(a).real)


def _check_finite(value: float, name: str) -> float:
    if not np.isfinite(value):
        raise NumericEvaluationError(f"non-finite value in MSE term '{name}'")
    return value


def analytic_mse(
    state: TransceiverState, channels: ChannelSet, config: SystemConfig
) -> MseBreakdown:
    """Evaluate every term family of the phase-noise-averaged MSE.

    The received distortion noise is power-proportional, so its
    contribution is the kappa_d-weighted diagonal of the mean received
    covariance; the same covariance evaluated on the transmit-distortion
    part alone yields the dropped cross term reported as ``y_term``.
    """
    w = np.asarray(state.precoder)
    c = np.asarray(state.equalizer)
    theta = np.asarray(state.phases)
    rho = config.rho
    ks, kd = config.kappa_s, config.kappa_d

    h_eff = effective_channel(channels, theta, rho)
    h_t = channels.h_t
    # RIS receive aperture with the phase shifts applied: H_r^H diag(theta)
    g_ris = channels.h_r.conj().T * theta[None, :]

    p_full = w @ w.conj().T
    p_diag = np.diag(np.sum(np.abs(w) ** 2, axis=1).astype(complex))

    def mean_rx_cov_parts(p):
        """(H_eff p H_eff^H, H_r^H Theta diag{H_t p H_t^H} Theta^H H_r)."""
        direct = h_eff @ p @ h_eff.conj().T
        d_vec = np.einsum("ij,jk,ik->i", h_t, p, h_t.conj())
        spread = (g_ris * d_vec[None, :]) @ g_ris.conj().T
        return direct, spread

    nx, spread_p = mean_rx_cov_parts(p_full)
    nv, spread_dp = mean_rx_cov_parts(p_diag)

    cc_col = np.sum(np.abs(c) ** 2, axis=0)  # diag of C^H C, length N_r
    one_m_rho2 = 1.0 - rho * rho

    signal = _check_finite(_real_trace(c @ nx @ c.conj().T), "signal")
    phase_noise = _check_finite(
        one_m_rho2 * _real_trace(c @ spread_p @ c.conj().T), "phase_noise"
    )
    tx_dist = _check_finite(
        ks * _real_trace(c @ nv @ c.conj().T)
        + ks * one_m_rho2 * _real_trace(c @ spread_dp @ c.conj().T),
        "tx_distortion",
    )
    rx_dist = _check_finite(
        kd * float(cc_col @ (np.diagonal(nx).real + one_m_rho2 * np.diagonal(spread_p).real)),
        "rx_distortion",
    )
    cross = _check_finite(-2.0 * _real_trace(c @ h_eff @ w), "cross")
    awgn = _check_finite(config.noise_power * float(np.sum(np.abs(c) ** 2)), "awgn")
    constant = float(config.d)
    y_term = _check_finite(
        ks
        * kd
        * float(cc_col @ (np.diagonal(nv).real + one_m_rho2 * np.diagonal(spread_dp).real)),
        "y_term",
    )

    total = signal + phase_noise + tx_dist + rx_dist + cross + awgn + constant
    return MseBreakdown(
        total=_check_finite(total, "total"),
        signal_term=signal,
        phase_noise_term=phase_noise,
        tx_distortion_terms=tx_dist,
        rx_distortion_terms=rx_dist,
        cross_terms=cross,
        awgn_term=awgn,
        constant_term=constant,
        y_term=y_term,
    )


def build_phase_quadratic(
    precoder: np.ndarray,
    equalizer: np.ndarray,
    channels: ChannelSet,
    config: SystemConfig,
) -> PhaseQuadratic:
    """Assemble (Xi, Q) of the phase subproblem from fresh W and C.

    Xi is the sum of six Hadamard products of RIS-side Gram matrices
    (PSD by the Schur product theorem); Q collects the diagonals of the
    four mixed direct/reflected products.
    """
    w = np.asarray(precoder)
    c = np.asarray(equalizer)
    h_t, h_r, h_d = channels.h_t, channels.h_r, channels.h_d
    m = h_t.shape[0]
    if h_r.shape[0] != m:
        raise ValueError(f"h_r rows {h_r.shape[0]} != h_t rows {m}")
    rho = config.rho
    ks, kd = config.kappa_s, config.kappa_d
    rho2 = rho * rho
    one_m_rho2 = 1.0 - rho2

    p_full = w @ w.conj().T
    p_diag = np.diag(np.sum(np.abs(w) ** 2, axis=1).astype(complex))
    cc = c.conj().T @ c
    cc_diag = np.diag(np.sum(np.abs(c) ** 2, axis=0).astype(complex))

    r_full = h_r @ cc @ h_r.conj().T  # H_r C^H C H_r^H
    r_diag = h_r @ cc_diag @ h_r.conj().T
    t_full = h_t @ p_full @ h_t.conj().T  # H_t W W^H H_t^H
    t_dist = h_t @ p_diag @ h_t.conj().T

    def d_of(a):
        return np.diag(np.diagonal(a))

    xi = (
        rho2 * (r_full * t_full.T)
        + one_m_rho2 * (r_full * d_of(t_full).T)
        + rho2 * ks * (r_full * t_dist.T)
        + ks * one_m_rho2 * (r_full * d_of(t_dist).T)
        + rho2 * kd * (r_diag * t_full.T)
        + kd * one_m_rho2 * (r_diag * d_of(t_full).T)
    )

    h_d_cc = h_d @ cc @ h_r.conj().T  # H_d C^H C H_r^H, N_t x M
    omega = np.einsum("ij,jk,ki->i", h_t, p_full, h_d_cc)
    psi = np.einsum("ij,jk,ki->i", h_t, p_diag, h_d_cc)
    t_vec = np.einsum("ij,jk,ki->i", h_t, p_full, h_d @ cc_diag @ h_r.conj().T)
    v_vec = np.einsum("ij,ji->i", h_t @ w, c @ h_r.conj().T)
    q = omega.conj() + ks * psi.conj() + kd * t_vec.conj() - v_vec.conj()

    # theta-independent offset: full MSE = f(theta) + constant on the
    # unit-modulus manifold; evaluated once at all-ones phases.
    theta_ref = np.ones(m, dtype=complex)
    state = TransceiverState(precoder=w, equalizer=c, phases=theta_ref)
    total_ref = analytic_mse(state, channels, config).total
    f_ref = float(
        (theta_ref.conj() @ xi @ theta_ref).real + 2.0 * rho * float((theta_ref.conj() @ q).real)
    )
    constant = total_ref - f_ref

    return PhaseQuadratic(
        xi=xi, q=q, omega=omega, psi=psi, t_vec=t_vec, v_vec=v_vec, constant=constant
    )


def nmse(mse: float, d: int) -> float:
    """MSE normalized by the stream count."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return mse / d
