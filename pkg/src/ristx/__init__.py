"""MSE-minimizing transceiver and RIS phase-shift design under hardware impairments.

Joint precoder/equalizer/phase-shift optimization for an RIS-aided
single-user MIMO link whose transceiver adds power-proportional
distortion noise and whose RIS elements carry Von Mises phase noise.
Closed-form analytic MSE evaluation is validated against a simulated
physical chain; the alternating solver combines a closed-form MMSE
equalizer, a KKT/bisection precoder, and a majorization-minimization
phase update.
"""

from .backend import NUMBA_ENABLED, default_backend
from .channel import (
    ChannelSet,
    FadingParams,
    ScenarioGeometry,
    generate_scenario,
    path_loss_linear,
    rician_channel,
    upa_steering,
)
from .config import SystemConfig, TransceiverState, noise_power_watts
from .experiment import (
    ConfigurationError,
    ExperimentSpec,
    ResultRow,
    load_spec,
    read_results,
    run_experiment,
    run_experiment_detailed,
    run_oracle_check,
    write_results,
)
from .impairments import (
    ImpairmentParams,
    phase_autocorrelation,
    sample_phase_factors,
    sample_phase_noise,
    tx_distortion_cov,
)
from .linalg import HermitianEigen, bessel_i_ratio, hermitian_eig, max_eigenvalue
from .montecarlo import monte_carlo_mse
from .objective import (
    MseBreakdown,
    PhaseQuadratic,
    analytic_mse,
    build_phase_quadratic,
    effective_channel,
    nmse,
)
from .phases import (
    MmState,
    PhaseSearchResult,
    mm_step,
    optimize_phases,
    phase_objective,
    surrogate_value,
)
from .solver import SCHEMES, SolveOptions, SolveTrace, solve, solve_baseline
from .transceiver import (
    PrecoderSolution,
    SolverError,
    build_precoder_matrix_a,
    lambda_upper_bound,
    update_equalizer,
    update_precoder,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "default_backend",
    "ChannelSet",
    "FadingParams",
    "ScenarioGeometry",
    "generate_scenario",
    "path_loss_linear",
    "rician_channel",
    "upa_steering",
    "SystemConfig",
    "TransceiverState",
    "noise_power_watts",
    "ConfigurationError",
    "ExperimentSpec",
    "ResultRow",
    "load_spec",
    "read_results",
    "run_experiment",
    "run_experiment_detailed",
    "run_oracle_check",
    "write_results",
    "ImpairmentParams",
    "phase_autocorrelation",
    "sample_phase_factors",
    "sample_phase_noise",
    "tx_distortion_cov",
    "HermitianEigen",
    "bessel_i_ratio",
    "hermitian_eig",
    "max_eigenvalue",
    "monte_carlo_mse",
    "MseBreakdown",
    "PhaseQuadratic",
    "analytic_mse",
    "build_phase_quadratic",
    "effective_channel",
    "nmse",
    "MmState",
    "PhaseSearchResult",
    "mm_step",
    "optimize_phases",
    "phase_objective",
    "surrogate_value",
    "SCHEMES",
    "SolveOptions",
    "SolveTrace",
    "solve",
    "solve_baseline",
    "PrecoderSolution",
    "SolverError",
    "build_precoder_matrix_a",
    "lambda_upper_bound",
    "update_equalizer",
    "update_precoder",
]
