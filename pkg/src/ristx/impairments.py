"""Hardware impairment models.

Transmit/receive distortion covariances (power-proportional additive
Gaussian noise), Von Mises RIS phase-noise sampling, and the analytic
autocorrelation of the random phase-noise matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import bessel_i_ratio, diag_part

__all__ = [
    "ImpairmentParams",
    "tx_distortion_cov",
    "sample_phase_noise",
    "sample_phase_factors",
    "phase_autocorrelation",
]


def mean_resultant_length(concentration: float) -> float:
    """Circular mean resultant length rho = E[cos(eps)] of the phase noise.

    ``concentration=inf`` models ideal RIS hardware (zero phase noise,
    rho = 1) and bypasses the Bessel ratio, which is defined for finite
    arguments only.
    """
    if math.isinf(concentration) and concentration > 0:
        return 1.0
    return bessel_i_ratio(concentration)


@dataclass(frozen=True)
class ImpairmentParams:
    """Transceiver distortion coefficients plus RIS phase-noise statistics.

    ``rho`` is cached from the concentration so the many expressions that
    need it do not re-evaluate the Bessel ratio; zero kappas model ideal
    transceiver hardware.
    """

    kappa_s: float
    kappa_d: float
    concentration: float
    rho: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not 0.0 <= self.kappa_s < 1.0:
            raise ValueError(f"kappa_s must be in [0, 1), got {self.kappa_s}")
        if not 0.0 <= self.kappa_d < 1.0:
            raise ValueError(f"kappa_d must be in [0, 1), got {self.kappa_d}")
        if not self.concentration >= 0.0:
            raise ValueError(f"concentration must be >= 0, got {self.concentration}")
        if self.rho is None:
            object.__setattr__(self, "rho", mean_resultant_length(self.concentration))
        else:
            expected = mean_resultant_length(self.concentration)
            if abs(self.rho - expected) > 1e-10:
                raise ValueError(
                    f"rho={self.rho} inconsistent with concentration={self.concentration} "
                    f"(expected {expected})"
                )


def tx_distortion_cov(precoder: np.ndarray, kappa_s: float) -> np.ndarray:
    """Covariance kappa_s * diag{W W^H} of the transmit distortion noise."""
    if kappa_s < 0:
        raise ValueError(f"kappa_s must be >= 0, got {kappa_s}")
    w = np.asarray(precoder)
    return kappa_s * np.diag(np.sum(np.abs(w) ** 2, axis=1))


def _best_fisher_cosines(
    kappa: float, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Rejection-sample (cos(eps), sign(eps)) pairs for eps ~ Von Mises(kappa).

    The Best-Fisher proposal works on cos(eps) directly; returning it
    avoids an arccos/cos round trip for consumers that only need the
    complex phase factor e^{j*eps}.
    """
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho_b = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho_b * rho_b) / (2.0 * rho_b)

    cosines = np.empty(count)
    signs = np.empty(count)
    filled = 0
    while filled < count:
        n = max(count - filled, 16)
        # ~35% headroom over the worst-case rejection rate of the sampler
        n = int(n * 1.35) + 16
        u1 = rng.random(n)
        u2 = rng.random(n)
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        accept = (c * (2.0 - c) - u2) > 0.0
        slow = ~accept & (u2 > 0)
        accept[slow] = (np.log(c[slow] / u2[slow]) + 1.0 - c[slow]) >= 0.0
        f_acc = np.clip(f[accept], -1.0, 1.0)
        u3 = rng.random(f_acc.size)
        take = min(f_acc.size, count - filled)
        cosines[filled : filled + take] = f_acc[:take]
        signs[filled : filled + take] = np.where(u3[:take] >= 0.5, 1.0, -1.0)
        filled += take
    return cosines, signs


def sample_phase_noise(
    concentration: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw i.i.d. zero-mean Von Mises phase-noise samples on (-pi, pi].

    Best-Fisher rejection sampling; concentration 0 falls back to the
    uniform circular distribution and infinite concentration to exactly
    zero noise.
    """
    if not concentration >= 0.0:
        raise ValueError(f"concentration must be >= 0, got {concentration}")
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if math.isinf(concentration):
        return np.zeros(count)
    if concentration < 1e-10:
        return rng.uniform(-np.pi, np.pi, size=count)
    cosines, signs = _best_fisher_cosines(float(concentration), count, rng)
    return signs * np.arccos(cosines)


def sample_phase_factors(
    concentration: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Complex unit phasors e^{j*eps} for eps ~ Von Mises(concentration)."""
    if not concentration >= 0.0:
        raise ValueError(f"concentration must be >= 0, got {concentration}")
    count = int(count)
    if math.isinf(concentration):
        return np.ones(count, dtype=complex)
    if concentration < 1e-10:
        eps = rng.uniform(-np.pi, np.pi, size=count)
        return np.cos(eps) + 1j * np.sin(eps)
    cosines, signs = _best_fisher_cosines(float(concentration), count, rng)
    return cosines + 1j * signs * np.sqrt(np.maximum(1.0 - cosines * cosines, 0.0))


def phase_autocorrelation(pi_matrix: np.ndarray, rho: float) -> np.ndarray:
    """Analytic value of E[Theta_hat @ Pi @ Theta_hat^H].

    Off-diagonal entries shrink by rho^2 while the diagonal survives
    untouched: rho^2 * Pi + (1 - rho^2) * diag{Pi}.
    """
    pi = np.asarray(pi_matrix)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise ValueError(f"Pi must be square, got shape {pi.shape}")
    rho2 = rho * rho
    return rho2 * pi + (1.0 - rho2) * np.diag(diag_part(pi))
