"""Monte Carlo estimate of the physical-chain MSE.

Simulates the actual transmit/reflect/receive chain per sample: data
symbols, transmit distortion, per-element Von Mises phase noise,
power-proportional receive distortion (conditioned on the realized
undistorted receive signal), and thermal noise. This is the independent
oracle for the analytic expansion; the two agree once the analytic
``y_term`` is added back.

Two implementations of the per-sample chain are provided: a numba
``@njit`` kernel (the default hot path, with its own scalar Von Mises
rejection sampler) and a chunked vectorized NumPy fallback. Selection
follows ``backend.py`` unless a backend is forced per call. The receive
distortion and thermal noise are drawn as one Gaussian with the summed
variance, which is distribution-identical and halves those draws.
"""

from __future__ import annotations

import math

import numpy as np

from .backend import NUMBA_ENABLED, resolve_backend
from .channel import ChannelSet
from .config import SystemConfig, TransceiverState
from .impairments import sample_phase_factors

__all__ = ["monte_carlo_mse"]

_CHUNK = 1 << 14


def _mc_mse_numpy(
    w: np.ndarray,
    c: np.ndarray,
    h_d_h: np.ndarray,
    h_r_h: np.ndarray,
    h_t: np.ndarray,
    theta: np.ndarray,
    kappa_s: float,
    kappa_d: float,
    concentration: float,
    noise_power: float,
    num_samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    n_t, d = w.shape
    m = h_t.shape[0]
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    zs_scale = np.sqrt(kappa_s * np.sum(np.abs(w) ** 2, axis=1))
    h_t_theta = theta[:, None] * h_t

    sum_e = 0.0
    sum_e2 = 0.0
    remaining = num_samples
    while remaining > 0:
        b = min(_CHUNK, remaining)
        s = (rng.standard_normal((d, b)) + 1j * rng.standard_normal((d, b))) * inv_sqrt2
        x = w @ s
        if kappa_s > 0.0:
            x += (zs_scale[:, None] * inv_sqrt2) * (
                rng.standard_normal((n_t, b)) + 1j * rng.standard_normal((n_t, b))
            )
        factor = sample_phase_factors(concentration, m * b, rng).reshape(m, b)
        ty = h_d_h @ x + h_r_h @ (factor * (h_t_theta @ x))
        # z_d (conditioned on the realized undistorted signal) and the
        # thermal noise folded into a single complex Gaussian
        rx_std = np.sqrt(kappa_d * np.abs(ty) ** 2 + noise_power)
        y = ty + (rx_std * inv_sqrt2) * (
            rng.standard_normal(ty.shape) + 1j * rng.standard_normal(ty.shape)
        )
        err = np.sum(np.abs(c @ y - s) ** 2, axis=0)
        sum_e += float(err.sum())
        sum_e2 += float((err * err).sum())
        remaining -= b
    return sum_e, sum_e2


if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True, fastmath=True)
    def _vm_phase_factor(kappa, r_bf):
        # Best-Fisher rejection; returns e^{j*eps} built from cos(eps)
        # directly, avoiding the arccos/cos round trip.
        while True:
            u1 = np.random.random()
            z = math.cos(math.pi * u1)
            f = (1.0 + r_bf * z) / (r_bf + z)
            cq = kappa * (r_bf - f)
            u2 = np.random.random()
            if u2 <= 0.0 or cq * (2.0 - cq) - u2 > 0.0 or math.log(cq / u2) + 1.0 - cq >= 0.0:
                if f > 1.0:
                    f = 1.0
                elif f < -1.0:
                    f = -1.0
                s = math.sqrt(1.0 - f * f)
                if np.random.random() >= 0.5:
                    return complex(f, s)
                return complex(f, -s)

    @njit(cache=True, fastmath=True)
    def _mc_mse_numba(
        seed,
        w,
        c,
        h_d_h,
        h_r_h,
        h_t_theta,
        zs_scale,
        kappa_d,
        concentration,
        conc_is_inf,
        noise_power,
        num_samples,
    ):
        np.random.seed(seed)
        n_t = w.shape[0]
        d = w.shape[1]
        n_r = h_d_h.shape[0]
        m = h_t_theta.shape[0]
        inv_sqrt2 = 1.0 / math.sqrt(2.0)

        r_bf = 0.0
        if (not conc_is_inf) and concentration >= 1e-10:
            tau = 1.0 + math.sqrt(1.0 + 4.0 * concentration * concentration)
            rho_b = (tau - math.sqrt(2.0 * tau)) / (2.0 * concentration)
            r_bf = (1.0 + rho_b * rho_b) / (2.0 * rho_b)

        s = np.empty(d, np.complex128)
        xt = np.empty(n_t, np.complex128)
        t1 = np.empty(m, np.complex128)
        ty = np.empty(n_r, np.complex128)

        sum_e = 0.0
        sum_e2 = 0.0
        for _ in range(num_samples):
            for i in range(d):
                s[i] = complex(np.random.standard_normal(), np.random.standard_normal()) * inv_sqrt2
            for i in range(n_t):
                acc = 0.0 + 0.0j
                for j in range(d):
                    acc += w[i, j] * s[j]
                if zs_scale[i] > 0.0:
                    acc += (
                        zs_scale[i]
                        * inv_sqrt2
                        * complex(np.random.standard_normal(), np.random.standard_normal())
                    )
                xt[i] = acc
            for mi in range(m):
                acc = 0.0 + 0.0j
                for j in range(n_t):
                    acc += h_t_theta[mi, j] * xt[j]
                if conc_is_inf:
                    t1[mi] = acc
                elif concentration < 1e-10:
                    ang = np.random.uniform(-math.pi, math.pi)
                    t1[mi] = complex(math.cos(ang), math.sin(ang)) * acc
                else:
                    t1[mi] = _vm_phase_factor(concentration, r_bf) * acc
            for i in range(n_r):
                acc = 0.0 + 0.0j
                for j in range(n_t):
                    acc += h_d_h[i, j] * xt[j]
                for j in range(m):
                    acc += h_r_h[i, j] * t1[j]
                # receive distortion + thermal noise in one draw
                mag2 = acc.real * acc.real + acc.imag * acc.imag
                rx_std = math.sqrt(kappa_d * mag2 + noise_power) * inv_sqrt2
                if rx_std > 0.0:
                    acc += rx_std * complex(
                        np.random.standard_normal(), np.random.standard_normal()
                    )
                ty[i] = acc
            err = 0.0
            for i in range(d):
                acc = 0.0 + 0.0j
                for j in range(n_r):
                    acc += c[i, j] * ty[j]
                diff = acc - s[i]
                err += diff.real * diff.real + diff.imag * diff.imag
            sum_e += err
            sum_e2 += err * err
        return sum_e, sum_e2


def monte_carlo_mse(
    state: TransceiverState,
    channels: ChannelSet,
    config: SystemConfig,
    num_samples: int,
    rng: np.random.Generator,
    backend: str = "auto",
) -> tuple[float, float]:
    """Estimate the physical MSE and its standard error by simulation.

    Returns ``(estimate, std_error)``; with a single sample the standard
    error is undefined and reported as NaN. The estimate includes the
    kappa_s*kappa_d coupling the analytic objective drops, so it should
    be compared against ``analytic total + y_term``.
    """
    num_samples = int(num_samples)
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    name = resolve_backend(backend)

    w = np.ascontiguousarray(state.precoder, dtype=np.complex128)
    c = np.ascontiguousarray(state.equalizer, dtype=np.complex128)
    theta = np.ascontiguousarray(state.phases, dtype=np.complex128)
    h_d_h = np.ascontiguousarray(channels.h_d.conj().T, dtype=np.complex128)
    h_r_h = np.ascontiguousarray(channels.h_r.conj().T, dtype=np.complex128)
    h_t = np.ascontiguousarray(channels.h_t, dtype=np.complex128)

    if name == "numba":
        zs_scale = np.sqrt(config.kappa_s * np.sum(np.abs(w) ** 2, axis=1))
        h_t_theta = np.ascontiguousarray(theta[:, None] * h_t)
        conc = config.concentration
        conc_is_inf = bool(math.isinf(conc))
        seed = int(rng.integers(0, 2**32 - 1))
        sum_e, sum_e2 = _mc_mse_numba(
            seed,
            w,
            c,
            h_d_h,
            h_r_h,
            h_t_theta,
            zs_scale,
            float(config.kappa_d),
            0.0 if conc_is_inf else float(conc),
            conc_is_inf,
            float(config.noise_power),
            num_samples,
        )
    else:
        sum_e, sum_e2 = _mc_mse_numpy(
            w,
            c,
            h_d_h,
            h_r_h,
            h_t,
            theta,
            float(config.kappa_s),
            float(config.kappa_d),
            float(config.concentration),
            float(config.noise_power),
            num_samples,
            rng,
        )

    mean = sum_e / num_samples
    if num_samples == 1:
        return mean, float("nan")
    var = max(sum_e2 / num_samples - mean * mean, 0.0) * num_samples / (num_samples - 1)
    return mean, math.sqrt(var / num_samples)
