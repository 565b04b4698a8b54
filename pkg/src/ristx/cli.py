"""Command-line entry point.

Verbs: ``run`` executes the sweep described by a spec file and writes
the CSV table, ``validate`` dry-parses a spec, ``oracle`` cross-checks
the analytic MSE against the simulated chain on random instances.
Exit codes: 0 success, 1 configuration error, 2 solver/oracle failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .backend import default_backend
from .experiment import (
    ConfigurationError,
    load_spec,
    run_experiment_detailed,
    run_oracle_check,
    write_json_trace,
    write_results,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ristx",
        description="Seeded NMSE sweeps for the impaired RIS-aided MIMO transceiver design.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the sweep and write the results CSV")
    run_p.add_argument("spec", help="path to the experiment spec file")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run_p.add_argument("--output", default=None, help="override the spec's output path")
    run_p.add_argument(
        "--json-trace",
        default=None,
        help="also dump per-realization traces as JSON to this path",
    )

    val_p = sub.add_parser("validate", help="parse the spec and report the resolved setup")
    val_p.add_argument("spec")

    orc_p = sub.add_parser("oracle", help="Monte-Carlo-vs-analytic MSE cross check")
    orc_p.add_argument("spec")
    orc_p.add_argument("--instances", type=int, default=20)
    orc_p.add_argument("--samples", type=int, default=200_000)
    orc_p.add_argument("--seed", type=int, default=2024)
    return parser


def _cmd_run(args) -> int:
    spec = load_spec(args.spec)
    outcome = run_experiment_detailed(spec, n_jobs=max(1, args.jobs))
    output = args.output or spec.output_path
    try:
        write_results(outcome.rows, output, spec.sweep_variable)
        json_path = args.json_trace or spec.json_trace_path
        if json_path:
            write_json_trace(outcome, spec, json_path)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(outcome.rows)} rows to {output}")
    if outcome.failures:
        print(f"{len(outcome.failures)} cell(s) failed:", file=sys.stderr)
        for failure in outcome.failures:
            print(f"  {failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    cfg = spec.base_config
    print(f"spec ok: {args.spec}")
    print(
        f"  system: n_t={cfg.n_t} n_r={cfg.n_r} m={cfg.m} d={cfg.d} "
        f"kappa_s={cfg.kappa_s} kappa_d={cfg.kappa_d} concentration={cfg.concentration} "
        f"(rho={cfg.rho:.6f})"
    )
    print(
        f"  noise_power={cfg.noise_power:.4g} W, power_budget={cfg.power_budget:.4g} W, "
        f"rician_factor={cfg.rician_factor}"
    )
    print(f"  sweep: {spec.sweep_variable} over {list(spec.sweep_values)}")
    print(
        f"  schemes: {', '.join(spec.schemes)}; realizations={spec.realizations}; "
        f"base_seed={spec.base_seed}"
    )
    print(f"  output: {spec.output_path}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    spec = load_spec(args.spec)
    checks = run_oracle_check(
        spec, instances=args.instances, samples=args.samples, seed=args.seed
    )
    print(f"backend: {default_backend()}")
    failed = 0
    for chk in checks:
        status = "pass" if chk["passed"] else "FAIL"
        failed += 0 if chk["passed"] else 1
        print(
            f"  [{status}] instance {chk['instance']:3d}: analytic+y={chk['analytic']:.6e} "
            f"mc={chk['estimate']:.6e} se={chk['std_error']:.2e} "
            f"({chk['deviation_sigmas']:.2f} sigma)"
        )
    print(f"{len(checks) - failed}/{len(checks)} instances within tolerance")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_oracle(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
