"""System configuration and the transceiver decision variables."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .impairments import ImpairmentParams, mean_resultant_length

__all__ = [
    "SystemConfig",
    "TransceiverState",
    "noise_power_watts",
    "DEFAULT_NOISE_DENSITY_DBM_HZ",
]

# Thermal noise density and bandwidth of the evaluation setup:
# -104 dBm/Hz over 1 MHz -> -44 dBm -> 3.981e-8 W.
DEFAULT_NOISE_DENSITY_DBM_HZ = -104.0
DEFAULT_BANDWIDTH_HZ = 1e6

# Power feasibility slack: (1 + kappa_s) * tr{W W^H} <= tau * (1 + this).
POWER_SLACK = 1e-9


def noise_power_watts(density_dbm_hz: float, bandwidth_hz: float) -> float:
    """Total noise power in watts from a density in dBm/Hz and a bandwidth."""
    dbm = density_dbm_hz + 10.0 * np.log10(bandwidth_hz)
    return float(10.0 ** (dbm / 10.0) * 1e-3)


@dataclass(frozen=True)
class SystemConfig:
    """All scalars of the link model.

    ``noise_power`` is stored in watts; the default corresponds to the
    -104 dBm/Hz density over the default 1 MHz bandwidth. ``rho`` is the
    cached mean resultant length of the RIS phase noise and must stay
    consistent with ``concentration``.
    """

    n_t: int = 8
    n_r: int = 4
    m: int = 40
    d: int = 4
    kappa_s: float = 0.1
    kappa_d: float = 0.1
    concentration: float = 20.0
    noise_power: float = noise_power_watts(DEFAULT_NOISE_DENSITY_DBM_HZ, DEFAULT_BANDWIDTH_HZ)
    power_budget: float = 1.0
    rician_factor: float = 10.0
    bandwidth: float = DEFAULT_BANDWIDTH_HZ
    rho: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("n_t", "n_r", "m", "d"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.d > min(self.n_t, self.n_r):
            raise ValueError(
                f"d={self.d} exceeds min(n_t, n_r)={min(self.n_t, self.n_r)}"
            )
        if not self.power_budget > 0:
            raise ValueError(f"power_budget must be > 0, got {self.power_budget}")
        # noise_power 0 is admitted for noiseless oracle checks; experiment
        # specs additionally require it to be strictly positive.
        if self.noise_power < 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power}")
        if not self.rician_factor >= 0:
            raise ValueError(f"rician_factor must be >= 0, got {self.rician_factor}")
        if self.rho is None:
            object.__setattr__(self, "rho", mean_resultant_length(self.concentration))
        # Delegates the kappa/concentration/rho consistency checks.
        self.impairments()

    def impairments(self) -> ImpairmentParams:
        return ImpairmentParams(
            kappa_s=self.kappa_s,
            kappa_d=self.kappa_d,
            concentration=self.concentration,
            rho=self.rho,
        )

    def ideal_hardware(self) -> "SystemConfig":
        """Copy with all impairments switched off (kappas 0, no phase noise)."""
        return replace(self, kappa_s=0.0, kappa_d=0.0, concentration=float("inf"), rho=1.0)


@dataclass
class TransceiverState:
    """Decision variables of the joint design: precoder, equalizer, phases."""

    precoder: np.ndarray  # N_t x d
    equalizer: np.ndarray  # d x N_r
    phases: np.ndarray  # length M, unit modulus

    def power_used(self, kappa_s: float) -> float:
        """Radiated power (1 + kappa_s) * tr{W W^H} in watts."""
        return float((1.0 + kappa_s) * np.sum(np.abs(self.precoder) ** 2))

    def validate(self, config: SystemConfig, check_power: bool = True) -> None:
        w, c, theta = self.precoder, self.equalizer, self.phases
        if w.shape != (config.n_t, config.d):
            raise ValueError(f"precoder shape {w.shape} != {(config.n_t, config.d)}")
        if c.shape != (config.d, config.n_r):
            raise ValueError(f"equalizer shape {c.shape} != {(config.d, config.n_r)}")
        if theta.shape != (config.m,):
            raise ValueError(f"phases shape {theta.shape} != {(config.m,)}")
        if np.max(np.abs(np.abs(theta) - 1.0)) > 1e-12:
            raise ValueError("phases must be unit modulus to within 1e-12")
        if check_power:
            budget = config.power_budget * (1.0 + POWER_SLACK)
            used = self.power_used(config.kappa_s)
            if used > budget:
                raise ValueError(
                    f"power {used:.6e} W exceeds budget {config.power_budget:.6e} W"
                )
