"""Closed-form equalizer and KKT precoder subproblem solvers.

The equalizer minimizes the MSE unconstrained and has a closed form;
the precoder minimizes it under the radiated-power budget via its KKT
system, with the Lagrange multiplier found by bisection on the
monotonically decreasing power function. Both the full-rank and the
rank-deficient quadratic-coefficient cases are covered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig
from .linalg import hermitian_eig
from .objective import effective_channel

__all__ = [
    "PrecoderSolution",
    "SolverError",
    "update_equalizer",
    "build_precoder_matrix_a",
    "update_precoder",
    "lambda_upper_bound",
]

# Smallest/largest eigenvalue ratio below which A is treated as rank
# deficient (double-precision eigensolver noise floor).
RANK_RATIO_THRESHOLD = 1e-10
MAX_BISECTION_ITERS = 200


class SolverError(RuntimeError):
    """Subproblem solver failed to converge; carries bracket state."""


@dataclass(frozen=True)
class PrecoderSolution:
    """Precoder subproblem result with its KKT certificate data."""

    precoder: np.ndarray
    multiplier: float
    a_matrix_rank_deficient: bool
    power_used: float  # (1 + kappa_s) * tr{W W^H}, watts
    bisection_iterations: int


def _ris_gram_pieces(equalizer: np.ndarray, phases: np.ndarray, channels: ChannelSet):
    """Diagonals of Theta^H H_r X H_r^H Theta for X = C^H C and diag{C^H C}."""
    c = equalizer
    theta = np.asarray(phases)
    h_r = channels.h_r
    cc = c.conj().T @ c
    cc_diag = np.sum(np.abs(c) ** 2, axis=0)
    # diag(Theta^H R Theta) = conj(theta) * diag(R) * theta
    r_full_diag = np.conj(theta) * np.einsum("ij,jk,ik->i", h_r, cc, h_r.conj()) * theta
    r_dist_diag = np.conj(theta) * np.einsum("ij,j,ij->i", h_r, cc_diag.astype(complex), h_r.conj()) * theta
    return r_full_diag, r_dist_diag


def update_equalizer(
    precoder: np.ndarray,
    phases: np.ndarray,
    channels: ChannelSet,
    config: SystemConfig,
) -> np.ndarray:
    """Closed-form MMSE equalizer for fixed precoder and phase shifts.

    The inner matrix is the mean received covariance including every
    impairment family plus the thermal noise floor, so it is Hermitian
    positive definite whenever the noise power is positive.
    """
    w = np.asarray(precoder)
    theta = np.asarray(phases)
    rho = config.rho
    ks, kd = config.kappa_s, config.kappa_d
    one_m_rho2 = 1.0 - rho * rho

    h_eff = effective_channel(channels, theta, rho)
    h_t = channels.h_t
    h_r_h = channels.h_r.conj().T
    g_ris = h_r_h * theta[None, :]

    p_full = w @ w.conj().T
    p_diag = np.diag(np.sum(np.abs(w) ** 2, axis=1).astype(complex))

    nx = h_eff @ p_full @ h_eff.conj().T
    nv = h_eff @ p_diag @ h_eff.conj().T
    nt_diag = np.einsum("ij,jk,ik->i", h_t, p_full, h_t.conj())
    nr_diag = np.einsum("ij,jk,ik->i", h_t, p_diag, h_t.conj())
    spread_p = (g_ris * nt_diag[None, :]) @ g_ris.conj().T
    spread_dp = (g_ris * nr_diag[None, :]) @ g_ris.conj().T

    j = (
        nx
        + ks * nv
        + kd * np.diag(np.diagonal(nx))
        + config.noise_power * np.eye(nx.shape[0])
        + one_m_rho2 * (spread_p + ks * spread_dp)
        + kd * one_m_rho2 * np.diag(np.diagonal(spread_p))
    )
    j = 0.5 * (j + j.conj().T)
    try:
        x = np.linalg.solve(j, h_eff @ w)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"equalizer inner matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("equalizer solve produced non-finite values")
    return x.conj().T


def build_precoder_matrix_a(
    equalizer: np.ndarray,
    phases: np.ndarray,
    channels: ChannelSet,
    config: SystemConfig,
) -> np.ndarray:
    """Quadratic coefficient of the precoder subproblem (Hermitian PSD)."""
    c = np.asarray(equalizer)
    theta = np.asarray(phases)
    rho = config.rho
    ks, kd = config.kappa_s, config.kappa_d
    one_m_rho2 = 1.0 - rho * rho

    h_eff = effective_channel(channels, theta, rho)
    h_t = channels.h_t
    cc = c.conj().T @ c
    cc_diag = np.sum(np.abs(c) ** 2, axis=0)

    core = h_eff.conj().T @ cc @ h_eff
    r_full_diag, r_dist_diag = _ris_gram_pieces(c, theta, channels)
    spread_full = h_t.conj().T @ (r_full_diag[:, None] * h_t)
    spread_dist = h_t.conj().T @ (r_dist_diag[:, None] * h_t)

    a = (
        core
        + ks * np.diag(np.diagonal(core))
        + kd * (h_eff.conj().T * cc_diag[None, :]) @ h_eff
        + one_m_rho2 * spread_full
        + ks * one_m_rho2 * np.diag(np.diagonal(spread_full))
        + kd * one_m_rho2 * spread_dist
    )
    return 0.5 * (a + a.conj().T)


def lambda_upper_bound(z_diag: np.ndarray, tau: float, kappa_s: float) -> float:
    """Upper bracket for the power-constraint multiplier.

    sqrt(sum(Z_ii) / (tau/(1+kappa_s))) / (1+kappa_s); the power
    function evaluated there is strictly below the budget whenever the
    quadratic coefficient has positive eigenvalues.
    """
    z = np.asarray(z_diag, dtype=float)
    if z.size == 0:
        raise ValueError("z_diag must be non-empty")
    if np.any(z < 0):
        raise ValueError("z_diag entries must be >= 0")
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    k1 = 1.0 + kappa_s
    return float(np.sqrt(np.sum(z) / (tau / k1)) / k1)


def update_precoder(
    equalizer: np.ndarray,
    phases: np.ndarray,
    channels: ChannelSet,
    config: SystemConfig,
    tol: float = 1e-9,
) -> PrecoderSolution:
    """Solve the power-constrained precoder subproblem via its KKT system.

    Tries the unconstrained stationary point first; if it violates the
    budget the multiplier is bisected on the monotone power function
    tr{W(lambda) W(lambda)^H} until it meets tau/(1+kappa_s) within
    ``tol * tau`` from the feasible side. Full-rank coefficients use the
    eigenbasis power formula; rank-deficient ones probe with direct
    regularized solves on a doubling bracket.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    c = np.asarray(equalizer)
    theta = np.asarray(phases)
    k1 = 1.0 + config.kappa_s
    tau = config.power_budget
    budget = tau / k1

    a = build_precoder_matrix_a(c, theta, channels, config)
    h_eff = effective_channel(channels, theta, config.rho)
    rhs = h_eff.conj().T @ c.conj().T  # N_t x d

    eig = hermitian_eig(a)
    vals, basis = eig.values, eig.basis
    full_rank = vals[0] > 0 and vals[-1] > RANK_RATIO_THRESHOLD * vals[0]
    rhs_basis = basis.conj().T @ rhs

    # lambda = 0 candidate: plain solve if full rank, else minimum-norm
    # pseudo-solve (consistent because col(rhs) is orthogonal to null(A)).
    if full_rank:
        w0 = basis @ (rhs_basis / vals[:, None])
    else:
        keep = vals > RANK_RATIO_THRESHOLD * max(vals[0], 0.0)
        inv_vals = np.zeros_like(vals)
        np.divide(1.0, vals, out=inv_vals, where=keep)
        w0 = basis @ (rhs_basis * inv_vals[:, None])
    p0 = float(np.sum(np.abs(w0) ** 2))
    if p0 <= budget * (1.0 + 1e-12):
        return PrecoderSolution(
            precoder=w0,
            multiplier=0.0,
            a_matrix_rank_deficient=not full_rank,
            power_used=k1 * p0,
            bisection_iterations=0,
        )

    iterations = 0
    if full_rank:
        z_diag = np.sum(np.abs(rhs_basis) ** 2, axis=1)
        lam_hi = lambda_upper_bound(z_diag, tau, config.kappa_s)

        def power_at(lam: float) -> float:
            return float(np.sum(z_diag / (vals + lam * k1) ** 2))

        def solution_at(lam: float) -> np.ndarray:
            return basis @ (rhs_basis / (vals + lam * k1)[:, None])

        lam_lo = 0.0
    else:
        def power_at(lam: float) -> float:
            return float(np.sum(np.abs(solution_at(lam)) ** 2))

        def solution_at(lam: float) -> np.ndarray:
            return np.linalg.solve(a + lam * k1 * np.eye(a.shape[0]), rhs)

        lam_lo, lam_hi = 0.0, 1e-12
        while power_at(lam_hi) > budget:
            lam_lo = lam_hi
            lam_hi *= 2.0
            iterations += 1
            if iterations >= MAX_BISECTION_ITERS:
                raise SolverError(
                    f"doubling bracket failed to cap the power: lambda={lam_hi:.3e}, "
                    f"power={power_at(lam_hi):.6e}, budget={budget:.6e}"
                )

    # Invariant: power(lam_lo) > budget >= power(lam_hi); converge the
    # feasible end onto the budget so the result never overshoots it.
    p_hi = power_at(lam_hi)
    while budget - p_hi > tol * tau:
        iterations += 1
        if iterations > MAX_BISECTION_ITERS:
            raise SolverError(
                f"bisection did not converge in {MAX_BISECTION_ITERS} iterations: "
                f"bracket [{lam_lo:.6e}, {lam_hi:.6e}], power {p_hi:.6e}, budget {budget:.6e}"
            )
        mid = 0.5 * (lam_lo + lam_hi)
        p_mid = power_at(mid)
        if p_mid > budget:
            lam_lo = mid
        else:
            lam_hi = mid
            p_hi = p_mid

    w = solution_at(lam_hi)
    return PrecoderSolution(
        precoder=w,
        multiplier=float(lam_hi),
        a_matrix_rank_deficient=not full_rank,
        power_used=k1 * float(np.sum(np.abs(w) ** 2)),
        bisection_iterations=iterations,
    )
