"""Unit-modulus phase-shift optimization by majorization-minimization.

The quadratic objective f(theta) = theta^H Xi theta + 2 rho Re{theta^H Q}
is majorized by replacing Xi with lambda_max(Xi) * I, which linearizes
each step into an independent per-element phase alignment with a closed
form. Every step descends f; iteration stops on relative stagnation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import max_eigenvalue
from .objective import PhaseQuadratic

__all__ = [
    "MmState",
    "PhaseSearchResult",
    "phase_objective",
    "surrogate_value",
    "mm_step",
    "optimize_phases",
]

DEFAULT_MAX_ITERS = 500
DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True)
class MmState:
    """One iterate of the MM loop."""

    theta: np.ndarray
    lambda_max: float
    u_vector: np.ndarray
    objective: float
    iteration: int


@dataclass(frozen=True)
class PhaseSearchResult:
    """Final phases, the per-iteration objective trace, and a convergence flag."""

    theta: np.ndarray
    trace: np.ndarray
    converged: bool
    final_state: MmState


def phase_objective(theta: np.ndarray, quad: PhaseQuadratic, rho: float) -> float:
    """f(theta) = theta^H Xi theta + 2 rho Re{theta^H Q}."""
    theta = np.asarray(theta)
    quadratic = float((theta.conj() @ quad.xi @ theta).real)
    linear = 2.0 * rho * float((theta.conj() @ quad.q).real)
    return quadratic + linear


def _ascent_direction(theta_t: np.ndarray, quad: PhaseQuadratic, lambda_max: float, rho: float) -> np.ndarray:
    return -(quad.xi @ theta_t - lambda_max * theta_t) - rho * quad.q


def surrogate_value(
    theta: np.ndarray,
    theta_t: np.ndarray,
    quad: PhaseQuadratic,
    lambda_max: float,
    rho: float,
) -> float:
    """Majorizer of f at expansion point theta_t, evaluated at theta.

    Tight at theta = theta_t and >= f(theta) everywhere on the
    unit-modulus set (lambda_max * I dominates Xi).
    """
    theta = np.asarray(theta)
    theta_t = np.asarray(theta_t)
    xi_tt = quad.xi @ theta_t
    y = (
        lambda_max * float((theta.conj() @ theta).real)
        + 2.0 * float((theta.conj() @ (xi_tt - lambda_max * theta_t)).real)
        + float((theta_t.conj() @ (lambda_max * theta_t - xi_tt)).real)
    )
    return y + 2.0 * rho * float((theta.conj() @ quad.q).real)


def mm_step(
    theta_t: np.ndarray, quad: PhaseQuadratic, lambda_max: float, rho: float
) -> np.ndarray:
    """One closed-form MM update.

    The surrogate is linear in theta up to constants, so its constrained
    minimizer aligns each element with the direction vector
    u = -(Xi - lambda_max I) theta_t - rho Q, i.e. theta_m = u_m/|u_m|.
    Elements with u_m = 0 keep the previous phase (any phase is optimal
    there; keeping it makes the update deterministic).
    """
    theta_t = np.asarray(theta_t)
    u = _ascent_direction(theta_t, quad, lambda_max, rho)
    mag = np.abs(u)
    out = theta_t.copy()
    nonzero = mag > 0.0
    out[nonzero] = u[nonzero] / mag[nonzero]
    return out


def optimize_phases(
    theta_0: np.ndarray,
    quad: PhaseQuadratic,
    rho: float,
    max_iters: int = DEFAULT_MAX_ITERS,
    rel_tol: float = DEFAULT_REL_TOL,
) -> PhaseSearchResult:
    """Run the MM loop from theta_0 until relative stagnation.

    The largest eigenvalue of Xi is computed once (Xi is fixed within
    the subproblem). The trace holds f at theta_0 followed by f after
    each step and is monotone non-increasing; if the iteration cap is
    hit the best (= last) iterate is returned with converged=False.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    theta = np.asarray(theta_0, dtype=complex).copy()
    lambda_max = max_eigenvalue(quad.xi)
    f_val = phase_objective(theta, quad, rho)
    trace = [f_val]
    converged = False
    iteration = 0
    u = _ascent_direction(theta, quad, lambda_max, rho)
    for iteration in range(1, max_iters + 1):
        theta = mm_step(theta, quad, lambda_max, rho)
        u = _ascent_direction(theta, quad, lambda_max, rho)
        f_new = phase_objective(theta, quad, rho)
        trace.append(f_new)
        if abs(f_val - f_new) <= rel_tol * (1.0 + abs(f_new)):
            converged = True
            f_val = f_new
            break
        f_val = f_new
    final = MmState(
        theta=theta,
        lambda_max=lambda_max,
        u_vector=u,
        objective=f_val,
        iteration=iteration,
    )
    return PhaseSearchResult(
        theta=theta, trace=np.asarray(trace), converged=converged, final_state=final
    )
