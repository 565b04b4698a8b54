"""Acceptance suite: the ten contract-level checks, one test per criterion.

Each test prints one `[criterion NN] PASS/FAIL` line (visible with
``pytest -s`` or on failure) and asserts the criterion at its stated
tolerance. Run order follows the criterion numbering.
"""

import time

import numpy as np
import pytest

from ristx import (
    ExperimentSpec,
    SolveOptions,
    SystemConfig,
    analytic_mse,
    bessel_i_ratio,
    build_phase_quadratic,
    build_precoder_matrix_a,
    effective_channel,
    max_eigenvalue,
    mm_step,
    monte_carlo_mse,
    optimize_phases,
    phase_autocorrelation,
    sample_phase_factors,
    solve,
    surrogate_value,
    update_equalizer,
    update_precoder,
)
from ristx.config import TransceiverState
from ristx.experiment import run_experiment
from ristx.phases import phase_objective
from ristx.solver import _initial_state

from conftest import make_channels, make_config, make_instance, random_state
from test_phases import grid_minimum_m1, grid_minimum_m2
from test_solver import classical_mmse_reference
from test_transceiver import _lagrangian_gradient_fd


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"[criterion {criterion:02d}] {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def rows_by_cell(rows):
    return {(row.sweep_value, row.scheme): row for row in rows}


def test_criterion_01_oracle_equivalence():
    """Analytic MSE + cross term vs 1e6-sample simulation, 50 instances."""
    t0 = time.time()
    hits = 0
    worst = 0.0
    for i in range(50):
        rng = np.random.default_rng(np.random.SeedSequence((1001, i)))
        config = make_config(
            rng=rng,
            n_t=int(rng.integers(2, 9)),
            n_r=int(rng.integers(2, 5)),
            m=int(rng.integers(2, 33)),
        )
        channels = make_channels(config, rng)
        state = random_state(config, rng, channels=channels)
        bd = analytic_mse(state, channels, config)
        est, se = monte_carlo_mse(state, channels, config, 1_000_000, rng)
        dev = abs(est - (bd.total + bd.y_term)) / se
        worst = max(worst, dev)
        hits += dev <= 3.0
    elapsed = time.time() - t0
    report(
        1,
        hits >= 48,
        f"{hits}/50 instances within 3 sigma (worst {worst:.2f}), {elapsed:.0f}s",
    )


def test_criterion_02_autocorrelation_lemma():
    """Simulated E[Theta Pi Theta^H] vs the closed form, 1% Frobenius."""
    m, draws = 8, 100_000
    worst = 0.0
    for conc in (1.0, 5.0, 20.0):
        rho = bessel_i_ratio(conc)
        for i in range(10):
            rng = np.random.default_rng(np.random.SeedSequence((1002, int(conc * 10), i)))
            pi = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            factors = sample_phase_factors(conc, draws * m, rng).reshape(draws, m)
            average = np.einsum("si,ij,sj->ij", factors, pi, factors.conj()) / draws
            expected = phase_autocorrelation(pi, rho)
            rel = np.linalg.norm(average - expected) / np.linalg.norm(expected)
            worst = max(worst, rel)
    report(2, worst <= 0.01, f"worst relative Frobenius error {worst:.4f} over 30 cells")


def test_criterion_03_equalizer_local_optimality():
    """100-perturbation probe on 100 random instances."""
    violations = 0
    for i in range(100):
        config, channels, state, rng = make_instance(3000 + i)
        c_opt = update_equalizer(state.precoder, state.phases, channels, config)
        base = analytic_mse(
            TransceiverState(state.precoder, c_opt, state.phases), channels, config
        ).total
        for _ in range(100):
            delta = rng.standard_normal(c_opt.shape) + 1j * rng.standard_normal(c_opt.shape)
            delta *= 1e-3 / np.linalg.norm(delta)
            perturbed = analytic_mse(
                TransceiverState(state.precoder, c_opt + delta, state.phases),
                channels,
                config,
            ).total
            if perturbed < base - 1e-12:
                violations += 1
    report(3, violations == 0, f"{violations} decreasing perturbations in 10000 probes")


def test_criterion_04_precoder_kkt():
    """KKT certificates on 100 instances incl. rank-deficient ones."""
    worst_grad = 0.0
    worst_slack = 0.0
    max_iters = 0
    rank_deficient_hits = 0
    for i in range(100):
        if i < 12:
            # constructed rank-deficient quadratic coefficient with the
            # budget forced active by the shrunk equalizer
            config, channels, state, _ = make_instance(
                4000 + i,
                n_t=6,
                n_r=3,
                d=2,
                kappa_s=0.0,
                kappa_d=0.0,
                concentration=float("inf"),
            )
            c = 0.01 * state.equalizer
        else:
            config, channels, state, _ = make_instance(4000 + i)
            c = state.equalizer if i % 2 else 0.01 * state.equalizer
        theta = state.phases
        sol = update_precoder(c, theta, channels, config)
        rank_deficient_hits += sol.a_matrix_rank_deficient
        tau = config.power_budget
        assert sol.multiplier >= 0.0
        assert sol.power_used <= tau * (1.0 + 1e-9)
        slack = abs(sol.multiplier * (sol.power_used - tau)) / (tau * max(sol.multiplier, 1.0))
        worst_slack = max(worst_slack, slack)
        h_eff = effective_channel(channels, theta, config.rho)
        scale = np.linalg.norm(h_eff.conj().T @ c.conj().T)
        grad = _lagrangian_gradient_fd(sol.precoder, sol.multiplier, c, theta, channels, config)
        worst_grad = max(worst_grad, np.linalg.norm(grad) / max(scale, 1e-12))
        max_iters = max(max_iters, sol.bisection_iterations)

    # scalar hand-algebra case
    config, channels, state, _ = make_instance(4999, n_t=1, n_r=2, d=1, m=3)
    c = 0.01 * state.equalizer
    sol = update_precoder(c, state.phases, channels, config, tol=1e-13)
    a = build_precoder_matrix_a(c, state.phases, channels, config)[0, 0].real
    rhs = (effective_channel(channels, state.phases, config.rho).conj().T @ c.conj().T)[0, 0]
    k1 = 1.0 + config.kappa_s
    lam_hand = (abs(rhs) * np.sqrt(k1 / config.power_budget) - a) / k1
    scalar_ok = lam_hand > 0 and abs(sol.multiplier - lam_hand) <= 1e-10 * lam_hand

    passed = (
        worst_grad <= 1e-5
        and worst_slack <= 1e-6
        and max_iters <= 200
        and rank_deficient_hits >= 10
        and scalar_ok
    )
    report(
        4,
        passed,
        f"grad<= {worst_grad:.2e}, slack<= {worst_slack:.2e}, iters<= {max_iters}, "
        f"rank-deficient cases {rank_deficient_hits}, scalar match {scalar_ok}",
    )


def test_criterion_05_mm_correctness():
    """Majorization + descent each iteration; grid minima at M=1, M=2."""
    chain_violations = 0
    for i in range(100):
        config, channels, state, rng = make_instance(5000 + i)
        quad = build_phase_quadratic(state.precoder, state.equalizer, channels, config)
        lam = max_eigenvalue(quad.xi)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, config.m))
        f_cur = phase_objective(theta, quad, config.rho)
        for _ in range(150):
            nxt = mm_step(theta, quad, lam, config.rho)
            f_nxt = phase_objective(nxt, quad, config.rho)
            g_nxt = surrogate_value(nxt, theta, quad, lam, config.rho)
            g_cur = surrogate_value(theta, theta, quad, lam, config.rho)
            slack = 1e-9 * (1.0 + abs(f_cur))
            if not (
                f_nxt <= g_nxt + slack
                and g_nxt <= g_cur + slack
                and abs(g_cur - f_cur) <= slack
                and f_nxt <= f_cur + 1e-10 * (1.0 + abs(f_cur))
            ):
                chain_violations += 1
            if abs(f_cur - f_nxt) <= 1e-12 * (1.0 + abs(f_nxt)):
                theta, f_cur = nxt, f_nxt
                break
            theta, f_cur = nxt, f_nxt

    grid_misses = 0
    for i in range(10):
        config, quad_rng = None, None
        config, channels, state, rng = make_instance(5200 + i, m=1)
        quad = build_phase_quadratic(state.precoder, state.equalizer, channels, config)
        res = optimize_phases(
            np.exp(1j * rng.uniform(0, 2 * np.pi, 1)), quad, config.rho, max_iters=2000
        )
        _, f_grid = grid_minimum_m1(quad, config.rho)
        if phase_objective(res.theta, quad, config.rho) > f_grid + 1e-3 * (1 + abs(f_grid)):
            grid_misses += 1
    for i in range(10):
        config, channels, state, rng = make_instance(5300 + i, m=2)
        quad = build_phase_quadratic(state.precoder, state.equalizer, channels, config)
        res = optimize_phases(
            np.exp(1j * rng.uniform(0, 2 * np.pi, 2)),
            quad,
            config.rho,
            max_iters=4000,
            rel_tol=1e-12,
        )
        f_grid = grid_minimum_m2(quad, config.rho)
        if phase_objective(res.theta, quad, config.rho) > f_grid + 1e-3 * (1 + abs(f_grid)):
            grid_misses += 1

    passed = chain_violations == 0 and grid_misses == 0
    report(
        5,
        passed,
        f"{chain_violations} majorization/descent violations, {grid_misses}/20 grid misses",
    )


def test_criterion_06_algorithm_convergence():
    """Non-increasing outer trace; convergence budget at the default setup.

    The iteration budget (>= 95/100 within 100 outer iterations at the
    1e-5 absolute threshold) is not attainable for the plain alternating
    scheme on this scenario class; the assertion is kept at the stated
    numbers and the measured rate is printed for the record.
    """
    geometry_defaults = SystemConfig()
    converged = 0
    monotone_violations = 0
    iters = []
    for i in range(100):
        rng = np.random.default_rng(np.random.SeedSequence((1006, i)))
        channels = make_channels(geometry_defaults, rng)
        trace = solve(channels, geometry_defaults, SolveOptions(seed=1006 + i, max_outer_iters=100))
        converged += trace.converged
        iters.append(trace.iterations_used)
        if np.any(np.diff(trace.mse_per_iteration) > 1e-9):
            monotone_violations += 1
    assert monotone_violations == 0, f"{monotone_violations} non-monotone traces"
    report(
        6,
        converged >= 95,
        f"monotone 100/100; converged {converged}/100 within 100 iterations at 1e-5 "
        f"(median used {int(np.median(iters))})",
    )


def test_criterion_07_classical_reduction():
    """Fixed point matches an independent classical MMSE design, 20 instances."""
    worst = 0.0
    for i in range(20):
        config, channels, _, _ = make_instance(
            7000 + i, kappa_s=0.0, kappa_d=0.0, concentration=float("inf")
        )
        channels = channels.without_ris()
        options = SolveOptions(seed=7000 + i, max_outer_iters=600, epsilon=1e-10)
        ours = solve(channels, config, options)
        w0, _ = _initial_state(config, np.random.default_rng(7000 + i))
        ref = classical_mmse_reference(
            channels.h_d.conj().T,
            config.d,
            config.power_budget,
            config.noise_power,
            w0,
            options.epsilon,
            options.max_outer_iters,
        )
        worst = max(worst, abs(ours.final_mse - ref[-1]) / ref[-1])
    report(7, worst <= 1e-6, f"worst relative fixed-point gap {worst:.2e} over 20 instances")


def _trend_spec(**overrides):
    base = dict(
        base_config=SystemConfig(),
        realizations=100,
        base_seed=88,
        options=SolveOptions(),
    )
    base.update(overrides)
    return ExperimentSpec(**base)


def test_criterion_08_element_count_trend():
    """NMSE decreasing in the element count; matched design wins everywhere."""
    t0 = time.time()
    spec = _trend_spec(
        sweep_variable="m",
        sweep_values=(20.0, 30.0, 40.0, 50.0, 60.0, 70.0),
        schemes=("proposed", "naive", "random_phase", "no_ris"),
        realizations=100,
    )
    cells = rows_by_cell(run_experiment(spec, n_jobs=2))
    proposed = [cells[(m, "proposed")].mean_nmse for m in spec.sweep_values]
    decreasing = all(b < a for a, b in zip(proposed, proposed[1:]))
    ordering = all(
        cells[(m, "proposed")].mean_nmse < cells[(m, other)].mean_nmse
        for m in spec.sweep_values
        for other in ("naive", "random_phase", "no_ris")
    )
    elapsed = time.time() - t0
    report(
        8,
        decreasing and ordering,
        f"proposed NMSE {['%.4f' % v for v in proposed]} decreasing={decreasing}, "
        f"ordering={ordering}, {elapsed:.0f}s",
    )


def test_criterion_09_tx_distortion_trend():
    """NMSE nondecreasing in the transmit distortion; ideal curve flat."""
    spec = _trend_spec(
        sweep_variable="kappa_s",
        sweep_values=(0.0, 0.05, 0.1, 0.15, 0.2),
        schemes=("proposed", "naive", "random_phase", "no_ris", "ideal_hw"),
        realizations=50,
    )
    cells = rows_by_cell(run_experiment(spec, n_jobs=2))
    aware_ok = True
    for scheme in ("proposed", "naive", "random_phase", "no_ris"):
        curve = [cells[(v, scheme)].mean_nmse for v in spec.sweep_values]
        if not all(b >= a for a, b in zip(curve, curve[1:])):
            aware_ok = False
    ideal = [cells[(v, "ideal_hw")].mean_nmse for v in spec.sweep_values]
    ideal_constant = all(v == ideal[0] for v in ideal)
    report(
        9,
        aware_ok and ideal_constant,
        f"HI-aware curves nondecreasing={aware_ok}, ideal constant={ideal_constant} "
        f"(ideal NMSE {ideal[0]:.4f})",
    )


def test_criterion_10_phase_noise_sensitivity():
    """NMSE nonincreasing in the phase-noise concentration."""
    spec = _trend_spec(
        sweep_variable="concentration",
        sweep_values=(1.0, 5.0, 20.0, 100.0),
        schemes=("proposed",),
        realizations=50,
    )
    cells = rows_by_cell(run_experiment(spec, n_jobs=2))
    curve = [cells[(v, "proposed")].mean_nmse for v in spec.sweep_values]
    ok = all(b <= a for a, b in zip(curve, curve[1:]))
    report(10, ok, f"NMSE over concentrations {['%.4f' % v for v in curve]}")
