"""Alternating-optimization driver and the comparison schemes.

One outer iteration updates, in order: the equalizer (closed form), the
precoder (KKT + bisection), and the phase shifts (inner MM loop on a
quadratic rebuilt from the fresh precoder/equalizer). The loop stops
when the objective decrease between consecutive iterations falls below
the configured threshold. The objective recorded per iteration is the
analytic MSE (excluding the dropped cross-distortion term), measured
after the phase update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig, TransceiverState
from .objective import analytic_mse, build_phase_quadratic
from .phases import DEFAULT_MAX_ITERS, optimize_phases
from .transceiver import SolverError, update_equalizer, update_precoder

__all__ = ["SolveOptions", "SolveTrace", "SCHEMES", "solve", "solve_baseline"]

SCHEMES = ("proposed", "no_ris", "random_phase", "naive", "ideal_hw")


@dataclass(frozen=True)
class SolveOptions:
    """Iteration limits, tolerances and the seed of one solve."""

    max_outer_iters: int = 100
    epsilon: float = 1e-5
    inner_mm_tol: float = 1e-8
    bisection_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError(f"max_outer_iters must be >= 1, got {self.max_outer_iters}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class SolveTrace:
    """Per-iteration objective values and the final state of one solve.

    ``final_mse`` is the value the scheme reports for comparison: the
    last trace entry, except for the naive scheme where it is the
    ideal-design state re-evaluated under the true impaired model (its
    trace shows the ideal design's own objective). ``final_state`` is
    feasible w.r.t. the config the scheme solved under.
    """

    mse_per_iteration: np.ndarray
    final_state: TransceiverState
    converged: bool
    iterations_used: int
    scheme: str
    final_mse: float


def _initial_state(
    config: SystemConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    theta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=config.m))
    w = rng.standard_normal((config.n_t, config.d)) + 1j * rng.standard_normal(
        (config.n_t, config.d)
    )
    # Saturate the radiated-power budget: (1 + kappa_s) tr{W W^H} = tau.
    scale = np.sqrt(config.power_budget / ((1.0 + config.kappa_s) * np.sum(np.abs(w) ** 2)))
    return w * scale, theta


def _alternate(
    channels: ChannelSet,
    config: SystemConfig,
    options: SolveOptions,
    scheme: str,
    update_phases: bool,
) -> SolveTrace:
    channels.validate(config)
    rng = np.random.default_rng(options.seed)
    w, theta = _initial_state(config, rng)
    c = np.zeros((config.d, config.n_r), dtype=complex)

    trace: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, options.max_outer_iters + 1):
        try:
            c = update_equalizer(w, theta, channels, config)
            sol = update_precoder(c, theta, channels, config, tol=options.bisection_tol)
            w = sol.precoder
            if update_phases:
                quad = build_phase_quadratic(w, c, channels, config)
                result = optimize_phases(
                    theta,
                    quad,
                    config.rho,
                    max_iters=DEFAULT_MAX_ITERS,
                    rel_tol=options.inner_mm_tol,
                )
                theta = result.theta
        except SolverError as exc:
            raise SolverError(f"outer iteration {iterations} ({scheme}): {exc}") from exc
        state = TransceiverState(precoder=w, equalizer=c, phases=theta)
        mse = analytic_mse(state, channels, config).total
        trace.append(mse)
        if iterations >= 2 and abs(trace[-2] - mse) < options.epsilon:
            converged = True
            break

    final_state = TransceiverState(precoder=w, equalizer=c, phases=theta)
    final_state.validate(config)
    return SolveTrace(
        mse_per_iteration=np.asarray(trace),
        final_state=final_state,
        converged=converged,
        iterations_used=iterations,
        scheme=scheme,
        final_mse=trace[-1],
    )


def solve(channels: ChannelSet, config: SystemConfig, options: SolveOptions) -> SolveTrace:
    """Joint equalizer/precoder/phase design under the impaired model."""
    return _alternate(channels, config, options, scheme="proposed", update_phases=True)


def solve_baseline(
    scheme: str, channels: ChannelSet, config: SystemConfig, options: SolveOptions
) -> SolveTrace:
    """One of the comparison schemes.

    no_ris: RIS-user link zeroed, equalizer/precoder alternation only.
    random_phase: phases drawn once at random and held fixed.
    naive: full design assuming ideal hardware, then re-evaluated under
        the true impaired model (power feasibility is w.r.t. the ideal
        design constraint the naive designer believes in).
    ideal_hw: full design and evaluation both under ideal hardware.
    """
    if scheme == "no_ris":
        return _alternate(
            channels.without_ris(), config, options, scheme="no_ris", update_phases=False
        )
    if scheme == "random_phase":
        return _alternate(channels, config, options, scheme="random_phase", update_phases=False)
    if scheme in ("naive", "ideal_hw"):
        ideal = config.ideal_hardware()
        trace = _alternate(channels, ideal, options, scheme=scheme, update_phases=True)
        if scheme == "ideal_hw":
            return trace
        plugged = analytic_mse(trace.final_state, channels, config).total
        return SolveTrace(
            mse_per_iteration=trace.mse_per_iteration,
            final_state=trace.final_state,
            converged=trace.converged,
            iterations_used=trace.iterations_used,
            scheme="naive",
            final_mse=plugged,
        )
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES[1:]}")
