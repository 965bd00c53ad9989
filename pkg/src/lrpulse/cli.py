"""Command-line front end: tables, synth, simulate, verify, calibrate-c.

Every command accepts its options as flags and/or a JSON config file
(--config); explicit flags override file values. Output files are written
atomically (temp file + rename). Exit codes: 0 success, 1 validation error or
failed verification, 2 numerical non-convergence, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .errors import (CalibrationError, ConvergenceError, PropagationError,
                     SingularityError, SynthesisError)
from .propagate import PropagationConfig, compare_with_analytic, propagate
from .synthesis import (PulseSchedule, calibrate_strategy_c, load_schedule_csv,
                        solve_omega_T_for_A, solve_omega_T_for_B, strategy_a,
                        strategy_b, strategy_c)
from .verify import run_verification
from .core import ket

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGENCE = 2
EXIT_IO = 3

TABLE_I_PARAMS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
TABLE_II_PARAMS = (0.4, 0.5, 0.6, 0.7)

DEFAULT_TARGET_DELTA_EPS = np.pi / 6


def _atomic_write(path: str, writer) -> None:
    """Call writer(tmp_path) then rename tmp_path onto path."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, obj: dict) -> None:
    def writer(tmp):
        with open(tmp, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _atomic_write(path, writer)


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the JSON config file, if one was given."""
    path = getattr(args, "config", None)
    if not path:
        return args
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    for key, value in cfg.items():
        if not hasattr(args, key):
            raise ValueError(f"{path}: unknown config key {key!r}")
        if getattr(args, key) in (None, False):
            setattr(args, key, value)
    return args


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")


def _default(args, name, value):
    if getattr(args, name, None) is None:
        setattr(args, name, value)


# ---------------------------------------------------------------------------
# schedule construction shared by synth / simulate / verify
# ---------------------------------------------------------------------------

def build_schedule(args) -> tuple[PulseSchedule, dict, float, str]:
    """Schedule plus calibration info, output time scale, and time-unit label."""
    strategy = args.strategy
    info: dict = {}
    if strategy in ("a", "b"):
        param_name = "A" if strategy == "a" else "B"
        _require(args, param_name)
        param = float(getattr(args, param_name))
        _default(args, "T", 1.0)
        T = float(args.T)
        if T <= 0:
            raise ValueError("T must be positive")
        if args.omega_T_over_pi is not None:
            omega_T = float(args.omega_T_over_pi) * np.pi
        else:
            solver = solve_omega_T_for_A if strategy == "a" else solve_omega_T_for_B
            cal = solver(param, tol=float(args.tol))
            omega_T = cal.value
            info["calibration"] = {"omega_T_over_pi": omega_T / np.pi,
                                   "residual": cal.residual,
                                   "iterations": cal.iterations}
        omega = omega_T / T
        if strategy == "a":
            schedule = strategy_a(param, omega, T)
        else:
            _default(args, "delta_t_over_T", 0.01)
            schedule = strategy_b(param, omega, T,
                                  float(args.delta_t_over_T) * T,
                                  neglect_imag=bool(args.neglect_imag))
        return schedule, info, T, "t/T"
    if strategy == "c":
        _default(args, "omega", 1.0)
        _default(args, "n_periods", 6)
        omega = float(args.omega)
        if omega <= 0:
            raise ValueError("omega must be positive")
        if args.Omega0_over_omega is not None:
            kappa = float(args.Omega0_over_omega)
        else:
            target = (float(args.target_delta_epsilon)
                      if args.target_delta_epsilon is not None
                      else DEFAULT_TARGET_DELTA_EPS)
            cal = calibrate_strategy_c(target, tol=float(args.tol))
            kappa = cal.value
            info["calibration"] = {"Omega0_over_omega": kappa,
                                   "target_delta_epsilon": target,
                                   "residual": cal.residual,
                                   "iterations": cal.iterations}
        schedule = strategy_c(kappa * omega, omega, int(args.n_periods))
        return schedule, info, 0.5 * np.pi / omega, "t/(pi/2w)"
    raise ValueError(f"unknown strategy {strategy!r}")


def _envelope_summary(schedule: PulseSchedule) -> dict:
    ts = schedule.sample_times(400)
    op = np.asarray(schedule.Omega_p(ts), dtype=complex)
    dd = np.asarray(schedule.Delta_p(ts), dtype=float)
    return {
        "max_abs_omega_p": float(np.max(np.abs(op))),
        "max_re_omega_p": float(np.max(op.real)),
        "min_re_omega_p": float(np.min(op.real)),
        "max_im_omega_p": float(np.max(op.imag)),
        "min_im_omega_p": float(np.min(op.imag)),
        "max_abs_delta": float(np.max(np.abs(dd))),
        "endpoint_abs_omega_p": [float(np.abs(op[0])), float(np.abs(op[-1]))],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_tables(args) -> int:
    if args.which == "I":
        params, solver, label = TABLE_I_PARAMS, solve_omega_T_for_A, "A"
    else:
        params, solver, label = TABLE_II_PARAMS, solve_omega_T_for_B, "B"
    rows = [(p, solver(p, tol=float(args.tol)).value / np.pi) for p in params]

    def writer(tmp):
        with open(tmp, "w") as fh:
            fh.write(f"{label.lower()},omegaT_over_pi\n")
            for p, u in rows:
                fh.write(f"{p:.12g},{u:.12g}\n")
    _atomic_write(args.out, writer)
    print(f"wrote table {args.which} ({len(rows)} rows) to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    schedule, info, time_scale, unit = build_schedule(args)
    spp = int(args.samples_per_period)
    _atomic_write(args.out,
                  lambda tmp: schedule.write_csv(tmp, spp, time_scale))
    written = [args.out]
    if schedule.strategy == "b" and schedule.params.get("neglect_imag"):
        # emit the unmodified-imaginary-part variant alongside for comparison
        base = strategy_b(schedule.params["B"], schedule.omega,
                          schedule.t_end,
                          schedule.params["delta_t_over_T"] * schedule.t_end,
                          neglect_imag=False)
        root, ext = os.path.splitext(args.out)
        alt = root + ".withimag" + ext
        _atomic_write(alt, lambda tmp: base.write_csv(tmp, spp, time_scale))
        written.append(alt)
    if args.summary:
        summary = {"schema_version": 1, "schedule": schedule.header(),
                   "time_unit": unit, "envelope": _envelope_summary(schedule)}
        summary.update(info)
        _write_json(args.summary, summary)
        written.append(args.summary)
    print("wrote " + ", ".join(written))
    return EXIT_OK


def cmd_simulate(args) -> int:
    schedule, info, time_scale, unit = build_schedule(args)
    cfg = PropagationConfig(steps_per_carrier_period=int(args.steps_per_period))
    report = propagate(schedule, ket(1), cfg)
    deviation = None
    if schedule.strategy != "b":
        deviation = compare_with_analytic(schedule, schedule.trajectory,
                                          ket(1), cfg)
    summary = report.summary()
    summary["time_unit"] = unit
    summary["analytic_deviation"] = deviation
    summary.update(info)
    if args.out:
        _atomic_write(args.out, lambda tmp: report.write_csv(tmp, time_scale))
    if args.summary:
        _write_json(args.summary, summary)
    print(f"final populations: p1={report.final_populations[0]:.6f} "
          f"p2={report.final_populations[1]:.6f} "
          f"p3={report.final_populations[2]:.6f}")
    print(f"max p2={report.max_p2:.6f}  norm drift={report.norm_drift:.3g}"
          + (f"  analytic deviation={deviation:.3g}"
             if deviation is not None else ""))
    return EXIT_OK


def cmd_verify(args) -> int:
    schedule, info, _, _ = build_schedule(args)
    csv = None
    if args.schedule:
        csv = load_schedule_csv(args.schedule)
    result = run_verification(schedule, csv=csv,
                              steps_per_period=int(args.steps_per_period))
    result.update(info)
    if args.out:
        _write_json(args.out, result)
    for name, check in result["checks"].items():
        status = "pass" if check["passed"] else "FAIL"
        print(f"{status}  {name}")
    if not result["passed"]:
        failed = [n for n, c in result["checks"].items() if not c["passed"]]
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


def cmd_calibrate_c(args) -> int:
    target = (float(args.target_delta_epsilon)
              if args.target_delta_epsilon is not None
              else DEFAULT_TARGET_DELTA_EPS)
    cal = calibrate_strategy_c(target, tol=float(args.tol))
    out = {"schema_version": 1, "target_delta_epsilon": target,
           "Omega0_over_omega": cal.value, "residual": cal.residual,
           "iterations": cal.iterations}
    if args.out:
        _write_json(args.out, out)
    print(f"Omega0/omega = {cal.value:.10f} "
          f"(residual {cal.residual:.3g}, {cal.iterations} iterations)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="calibration tolerance (default 1e-6)")


def _add_strategy(p):
    p.add_argument("--strategy", choices=("a", "b", "c"))
    p.add_argument("--A", type=float, help="strategy-a window amplitude")
    p.add_argument("--B", type=float, help="strategy-b window amplitude")
    p.add_argument("--T", type=float, help="schedule duration in seconds "
                   "(strategies a/b, default 1.0)")
    p.add_argument("--omega-T-over-pi", dest="omega_T_over_pi", type=float,
                   help="override the calibrated omega*T (in units of pi)")
    p.add_argument("--delta-t-over-T", dest="delta_t_over_T", type=float,
                   help="strategy-b patch half-width in units of T (default 0.01)")
    p.add_argument("--neglect-imag", dest="neglect_imag", action="store_true",
                   help="strategy-b: drop the imaginary envelope part")
    p.add_argument("--omega", type=float,
                   help="strategy-c carrier frequency (default 1.0)")
    p.add_argument("--Omega0-over-omega", dest="Omega0_over_omega", type=float,
                   help="strategy-c amplitude ratio; omit to calibrate")
    p.add_argument("--target-delta-epsilon", dest="target_delta_epsilon",
                   type=float,
                   help="strategy-c per-period phase increment target "
                   "(default pi/6)")
    p.add_argument("--n-periods", dest="n_periods", type=int,
                   help="strategy-c carrier periods (default 6)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrpulse",
        description="Invariant-based pulse design for driven three-level "
                    "systems beyond the rotating-wave approximation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="write a calibration table as CSV")
    _add_common(p)
    p.add_argument("--which", choices=("I", "II"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("synth", help="synthesize a pulse schedule CSV")
    _add_common(p)
    _add_strategy(p)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="optional JSON summary path")
    p.add_argument("--samples-per-period", dest="samples_per_period",
                   type=int, default=200)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate",
                       help="synthesize, propagate, and report populations")
    _add_common(p)
    _add_strategy(p)
    p.add_argument("--out", help="population-trace CSV path")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--steps-per-period", dest="steps_per_period",
                   type=int, default=2000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the self-check suites")
    _add_common(p)
    _add_strategy(p)
    p.add_argument("--schedule", help="also validate this schedule CSV file")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--steps-per-period", dest="steps_per_period",
                   type=int, default=2000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("calibrate-c",
                       help="solve the strategy-c amplitude ratio")
    _add_common(p)
    p.add_argument("--target-delta-epsilon", dest="target_delta_epsilon",
                   type=float)
    p.add_argument("--out", help="JSON result path")
    p.set_defaults(func=cmd_calibrate_c)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        if args.tol <= 0:
            raise ValueError("tol must be positive")
        return args.func(args)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CalibrationError, ConvergenceError, SynthesisError,
            SingularityError, PropagationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
