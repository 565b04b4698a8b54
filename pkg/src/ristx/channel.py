"""Geometry-driven channel generation.

Distance-law path loss, uniform-planar-array steering vectors, Rician
small-scale fading, and the full set of link matrices for one channel
realization. All randomness flows through an explicit generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .config import SystemConfig

__all__ = [
    "ScenarioGeometry",
    "FadingParams",
    "ChannelSet",
    "path_loss_linear",
    "upa_steering",
    "rician_channel",
    "generate_scenario",
    "ris_panel_shape",
]

AnglePair = Tuple[float, float]  # (azimuth, elevation) in radians


@dataclass(frozen=True)
class ScenarioGeometry:
    """2-D node positions in meters."""

    bs_position: Tuple[float, float] = (0.0, 0.0)
    ris_position: Tuple[float, float] = (10.0, 0.0)
    user_position: Tuple[float, float] = (10.0, 5.0)

    def __post_init__(self):
        pts = [self.bs_position, self.ris_position, self.user_position]
        names = ["bs", "ris", "user"]
        for i in range(3):
            for j in range(i + 1, 3):
                if math.dist(pts[i], pts[j]) <= 0.0:
                    raise ValueError(f"{names[i]} and {names[j]} positions coincide")

    def distance(self, a: str, b: str) -> float:
        pos = {
            "bs": self.bs_position,
            "ris": self.ris_position,
            "user": self.user_position,
        }
        return math.dist(pos[a], pos[b])


@dataclass(frozen=True)
class FadingParams:
    """Small-scale fading parameters for one link.

    ``aod``/``aoa`` fix the LoS departure/arrival angles; leave them None
    to draw fresh angles per realization (azimuth uniform on [0, 2pi),
    elevation uniform on [-pi/2, pi/2]).
    """

    rician_factor: float = 10.0
    pathloss_exponent_los: float = 2.0
    pathloss_exponent_nlos: float = 3.75
    aod: Optional[AnglePair] = None
    aoa: Optional[AnglePair] = None
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.rician_factor < 0:
            raise ValueError(f"rician_factor must be >= 0, got {self.rician_factor}")
        if self.pathloss_exponent_los <= 0 or self.pathloss_exponent_nlos <= 0:
            raise ValueError("path-loss exponents must be > 0")
        if self.element_spacing <= 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing}")


@dataclass(frozen=True)
class ChannelSet:
    """The three link matrices of one realization.

    h_d: N_t x N_r direct BS-user channel (used Hermitian-transposed on
    the receive side), h_r: M x N_r RIS-user channel, h_t: M x N_t
    BS-RIS channel.
    """

    h_d: np.ndarray
    h_r: np.ndarray
    h_t: np.ndarray

    def validate(self, config: SystemConfig) -> None:
        if self.h_d.shape != (config.n_t, config.n_r):
            raise ValueError(f"h_d shape {self.h_d.shape} != {(config.n_t, config.n_r)}")
        if self.h_r.shape != (config.m, config.n_r):
            raise ValueError(f"h_r shape {self.h_r.shape} != {(config.m, config.n_r)}")
        if self.h_t.shape != (config.m, config.n_t):
            raise ValueError(f"h_t shape {self.h_t.shape} != {(config.m, config.n_t)}")
        for name in ("h_d", "h_r", "h_t"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    def without_ris(self) -> "ChannelSet":
        """Copy with the RIS-user link zeroed (direct path only)."""
        return ChannelSet(h_d=self.h_d, h_r=np.zeros_like(self.h_r), h_t=self.h_t)


def path_loss_linear(distance: float, exponent: float) -> float:
    """Linear power gain for PL_dB = -30 - 10 * exponent * log10(distance)."""
    if distance <= 0:
        raise ValueError(f"distance must be > 0 m, got {distance}")
    pl_db = -30.0 - 10.0 * exponent * math.log10(distance)
    return 10.0 ** (pl_db / 10.0)


def upa_steering(
    azimuth: float, elevation: float, rows: int, cols: int, spacing: float
) -> np.ndarray:
    """Steering vector of a rows x cols uniform planar array.

    Element (p, q) sits at index p * cols + q and contributes phase
    2*pi*spacing*(p*sin(el)*cos(az) + q*sin(el)*sin(az)) with the
    spacing in carrier wavelengths. A rows x 1 array degenerates to a
    uniform linear array.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"array must have at least one element, got {rows}x{cols}")
    p = np.arange(rows)[:, None]
    q = np.arange(cols)[None, :]
    phase = (
        2.0
        * np.pi
        * spacing
        * (p * math.sin(elevation) * math.cos(azimuth) + q * math.sin(elevation) * math.sin(azimuth))
    )
    return np.exp(1j * phase).reshape(rows * cols)


def ris_panel_shape(m: int) -> Tuple[int, int]:
    """Near-square (rows, cols) factorization used for the RIS panel."""
    best = 1
    for r in range(1, int(math.isqrt(m)) + 1):
        if m % r == 0:
            best = r
    return best, m // best


def _draw_angles(rng: np.random.Generator) -> AnglePair:
    return float(rng.uniform(0.0, 2.0 * np.pi)), float(rng.uniform(-np.pi / 2, np.pi / 2))


def rician_channel(
    mean_gain: float,
    params: FadingParams,
    dims: Tuple[int, int],
    rng: np.random.Generator,
    rx_shape: Optional[Tuple[int, int]] = None,
    tx_shape: Optional[Tuple[int, int]] = None,
) -> np.ndarray:
    """Draw one Rician-faded rows x cols channel matrix.

    The LoS component is the outer product of the receive- and
    transmit-side steering vectors, the NLoS component has i.i.d.
    CN(0, 1) entries, and the per-entry mean power equals ``mean_gain``.
    Array geometries default to degenerate (n, 1) linear arrays; pass
    ``rx_shape``/``tx_shape`` for true planar panels.
    """
    if mean_gain < 0:
        raise ValueError(f"mean_gain must be >= 0, got {mean_gain}")
    rows, cols = dims
    rx_shape = rx_shape or (rows, 1)
    tx_shape = tx_shape or (cols, 1)
    if rx_shape[0] * rx_shape[1] != rows or tx_shape[0] * tx_shape[1] != cols:
        raise ValueError("array shapes must multiply out to the matrix dims")

    aoa = params.aoa if params.aoa is not None else _draw_angles(rng)
    aod = params.aod if params.aod is not None else _draw_angles(rng)
    a_r = upa_steering(aoa[0], aoa[1], rx_shape[0], rx_shape[1], params.element_spacing)
    a_t = upa_steering(aod[0], aod[1], tx_shape[0], tx_shape[1], params.element_spacing)
    h_los = np.outer(a_r, a_t.conj())

    h_nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)

    beta = params.rician_factor
    los_w = math.sqrt(beta / (beta + 1.0))
    nlos_w = math.sqrt(1.0 / (beta + 1.0))
    return math.sqrt(mean_gain) * (los_w * h_los + nlos_w * h_nlos)


def generate_scenario(
    config: SystemConfig,
    geometry: ScenarioGeometry,
    fading: FadingParams,
    rng: np.random.Generator,
) -> ChannelSet:
    """Generate the full channel set for one realization.

    The BS-RIS and RIS-user links are Rician with the configured factor
    and the LoS path-loss exponent; the direct BS-user link is pure NLoS
    (Rayleigh) with the NLoS exponent. The RIS is a near-square planar
    panel; BS and user arrays are linear. Each link draws from its own
    child stream, so one link's draws do not shift with another link's
    dimensions (sweeping the element count leaves the direct channel
    realizations untouched).
    """
    d_bs_ris = geometry.distance("bs", "ris")
    d_ris_user = geometry.distance("ris", "user")
    d_bs_user = geometry.distance("bs", "user")
    rng_t, rng_r, rng_d = rng.spawn(3)

    ris_shape = ris_panel_shape(config.m)
    rician = FadingParams(
        rician_factor=config.rician_factor,
        pathloss_exponent_los=fading.pathloss_exponent_los,
        pathloss_exponent_nlos=fading.pathloss_exponent_nlos,
        aod=fading.aod,
        aoa=fading.aoa,
        element_spacing=fading.element_spacing,
    )
    rayleigh = FadingParams(
        rician_factor=0.0,
        pathloss_exponent_los=fading.pathloss_exponent_los,
        pathloss_exponent_nlos=fading.pathloss_exponent_nlos,
        aod=fading.aod,
        aoa=fading.aoa,
        element_spacing=fading.element_spacing,
    )

    h_t = rician_channel(
        path_loss_linear(d_bs_ris, fading.pathloss_exponent_los),
        rician,
        (config.m, config.n_t),
        rng_t,
        rx_shape=ris_shape,
    )
    h_r = rician_channel(
        path_loss_linear(d_ris_user, fading.pathloss_exponent_los),
        rician,
        (config.m, config.n_r),
        rng_r,
        rx_shape=ris_shape,
    )
    h_d = rician_channel(
        path_loss_linear(d_bs_user, fading.pathloss_exponent_nlos),
        rayleigh,
        (config.n_t, config.n_r),
        rng_d,
    )
    channels = ChannelSet(h_d=h_d, h_r=h_r, h_t=h_t)
    channels.validate(config)
    return channels
