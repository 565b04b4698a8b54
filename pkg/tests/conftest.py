"""Shared instance builders for the test suite."""

import numpy as np
import pytest

from ristx import (
    ChannelSet,
    FadingParams,
    ScenarioGeometry,
    SystemConfig,
    TransceiverState,
    generate_scenario,
)

GEOMETRY = ScenarioGeometry()
FADING = FadingParams()


def make_config(seed=None, rng=None, **overrides):
    """Random small config; explicit overrides win."""
    if rng is None:
        rng = np.random.default_rng(seed)
    base = dict(
        n_t=int(rng.integers(2, 9)),
        n_r=int(rng.integers(2, 5)),
        m=int(rng.integers(2, 17)),
        kappa_s=float(rng.uniform(0.0, 0.15)),
        kappa_d=float(rng.uniform(0.0, 0.15)),
        concentration=float(rng.uniform(0.5, 30.0)),
    )
    base.update(overrides)
    if "d" not in overrides:
        base["d"] = int(rng.integers(1, min(base["n_t"], base["n_r"]) + 1))
    return SystemConfig(**base)


def make_channels(config, rng) -> ChannelSet:
    return generate_scenario(config, GEOMETRY, FADING, rng)


def random_state(config, rng, channels=None, power_fraction=None) -> TransceiverState:
    """Random feasible state; power_fraction=1 saturates the budget.

    When channels are given the equalizer is rescaled so the signal
    term lands at the stream-count scale; otherwise the channel terms
    would be microscopic against the constant and a Monte Carlo
    comparison would not exercise the expansion.
    """
    if power_fraction is None:
        power_fraction = float(rng.uniform(0.25, 1.0))
    w = rng.standard_normal((config.n_t, config.d)) + 1j * rng.standard_normal(
        (config.n_t, config.d)
    )
    w *= np.sqrt(
        power_fraction
        * config.power_budget
        / ((1.0 + config.kappa_s) * np.sum(np.abs(w) ** 2))
    )
    c = (
        rng.standard_normal((config.d, config.n_r))
        + 1j * rng.standard_normal((config.d, config.n_r))
    ) / np.sqrt(config.n_r)
    theta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=config.m))
    if channels is not None:
        from ristx.objective import effective_channel

        h_eff = effective_channel(channels, theta, config.rho)
        gram = c @ h_eff @ w
        signal = float(np.sum(np.abs(gram) ** 2))
        c *= np.sqrt(config.d / max(signal, 1e-300))
    return TransceiverState(precoder=w, equalizer=c, phases=theta)


def make_instance(seed, **overrides):
    """(config, channels, state, rng) tuple from one seed."""
    rng = np.random.default_rng(np.random.SeedSequence((777, seed)))
    config = make_config(rng=rng, **overrides)
    channels = make_channels(config, rng)
    state = random_state(config, rng, channels=channels)
    return config, channels, state, rng


def random_hermitian(n, rng, psd=False):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if psd:
        return a @ a.conj().T
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
