"""``torque-track`` command-line interface.

Exit codes: 0 success, 1 bad input or configuration, 2 numerical failure or
failed validation check.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import config
from .analysis import summarize
from .controller import solve_settling_constant, tune_gains
from .errors import InputError, NumericalError
from .output import write_trace_csv, write_trace_svg
from .simulator import controller_for, simulate
from .sweep import write_sweep
from .validation import validate_model

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2

DEFAULT_MODELS = ("pendulum_model.json", "twolink_model.json", "threelink_model.json")


def _err(msg: str) -> None:
    print(f"torque-track: {msg}", file=sys.stderr)


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "not settled"
    raise TypeError(type(x).__name__)


def cmd_tune(args) -> int:
    try:
        gains = tune_gains(args.ts)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    p = solve_settling_constant()
    rows = [
        {"ts": float(t), "omega0": float(w), "kp": float(kp), "kv": float(kv)}
        for t, w, kp, kv in zip(gains.ts, gains.omega0, gains.kp, gains.kv)
    ]
    if args.json:
        print(json.dumps({"P": p, "rows": rows}, indent=2))
    else:
        print(f"P = {p:.12f}")
        print(f"{'T_s [s]':>12} {'omega0 [rad/s]':>16} {'kp [1/s^2]':>14} {'kv [1/s]':>12}")
        for r in rows:
            print(f"{r['ts']:>12.6g} {r['omega0']:>16.10g} {r['kp']:>14.10g} {r['kv']:>12.10g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        scenario = config.load_scenario(args.config)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = args.out or scenario.outputs.get("csv")
    plot = args.plot or scenario.outputs.get("plot")
    if not out:
        _err("no trace output path: pass --out or set outputs.csv")
        return EXIT_INPUT
    cfg = controller_for(scenario.model, scenario.gains, scenario.sim.mismatch)
    status = EXIT_OK
    try:
        trace = simulate(scenario.model, cfg, scenario.trajectory, scenario.sim, law=scenario.law)
    except NumericalError as exc:
        _err(f"numerical failure: {exc}")
        trace = exc.partial
        status = EXIT_NUMERICAL
        if trace is None or len(trace) == 0:
            return status
    write_trace_csv(trace, Path(out))
    if plot:
        write_trace_svg(trace, Path(plot))
    report = summarize(trace, scenario.gains).to_dict()
    report["status"] = "ok" if status == EXIT_OK else "numerical_error"
    print(json.dumps(report, indent=2, default=_json_default))
    return status


def cmd_sweep(args) -> int:
    if args.jobs < 1:
        _err(f"--jobs must be >= 1, got {args.jobs}")
        return EXIT_INPUT
    try:
        sweep = config.load_sweep(args.config)
        path = write_sweep(sweep, Path(args.out), jobs=args.jobs)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.samples < 1:
        _err(f"--samples must be >= 1, got {args.samples}")
        return EXIT_INPUT
    try:
        names = [args.config] if args.config else list(DEFAULT_MODELS)
        models = [(name, config.load_model(name)) for name in names]
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    ok = True
    for name, model in models:
        print(f"# {name} ({model.n} link{'s' if model.n > 1 else ''})")
        for result in validate_model(model, samples=args.samples):
            print(result.line())
            ok &= result.passed
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_NUMERICAL


class _Parser(argparse.ArgumentParser):
    """Usage errors are bad input (exit 1); exit 2 is kept for numerical failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="torque-track",
        description="Computed-torque trajectory tracking for planar serial chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="gains for desired settling times")
    p.add_argument("--ts", type=float, action="append", required=True, help="settling time [s]; repeatable")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("simulate", help="run a scenario, write the trace CSV, print a JSON summary")
    p.add_argument("--config", required=True, help="scenario JSON (path or bundled name)")
    p.add_argument("--out", help="trace CSV path (overrides outputs.csv)")
    p.add_argument("--plot", help="SVG plot path (overrides outputs.plot)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a one-parameter sweep")
    p.add_argument("--config", required=True, help="sweep JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel variants (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check the dynamics against finite-difference oracles")
    p.add_argument("--config", help="model JSON (default: bundled 1-, 2- and 3-link models)")
    p.add_argument("--samples", type=int, default=200, help="random states per check")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
