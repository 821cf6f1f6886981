"""One-parameter sweeps over a base scenario.

Each variant is an independent simulation; with ``jobs > 1`` they run in a
process pool. Rows always come back ordered by parameter value.
"""

from __future__ import annotations

import copy
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analysis import summarize
from .config import SweepConfig, parse_scenario
from .errors import InputError, NumericalError
from .output import fmt
from .simulator import controller_for, simulate


def variant_document(base: dict, parameter: str, value) -> dict:
    """Copy of the base scenario with one parameter replaced."""
    doc = copy.deepcopy(base)
    vec = list(value) if isinstance(value, (list, tuple)) else value
    if parameter == "ts":
        controller = doc["controller"]
        controller.pop("kp", None)
        controller.pop("kv", None)
        controller["ts"] = vec
    elif parameter == "mass_scale":
        doc["controller"]["mismatch"] = {"mass_scale": vec}
    elif parameter == "torque_limit":
        doc["sim"]["torque_limit"] = vec
    elif parameter == "control_period":
        if isinstance(vec, list):
            raise InputError("control_period sweep values must be scalars")
        doc["sim"]["control_period"] = vec
    else:
        raise InputError(f"unknown sweep parameter {parameter!r}")
    return doc


def run_variant(doc: dict) -> dict:
    """Simulate one scenario document and return its summary row."""
    scenario = parse_scenario(doc)
    cfg = controller_for(scenario.model, scenario.gains, scenario.sim.mismatch)
    row = {"status": "ok", "failure_time": math.nan}
    try:
        trace = simulate(scenario.model, cfg, scenario.trajectory, scenario.sim, law=scenario.law)
    except NumericalError as exc:
        row.update(status="numerical_error", failure_time=exc.time)
        trace = exc.partial
        if trace is None or len(trace) == 0:
            return row
    report = summarize(trace, scenario.gains)
    row["settled"] = report.settled and row["status"] == "ok"
    row["energy_drift"] = report.energy_drift
    for j, js in enumerate(report.joints, start=1):
        row[f"settling_time{j}"] = js.settling_time
        row[f"rms_error{j}"] = js.rms_error
        row[f"peak_torque{j}"] = js.peak_torque
        row[f"saturation_duty{j}"] = js.saturation_duty
        row[f"oracle_deviation{j}"] = js.oracle_deviation
    return row


def _sort_key(value):
    return tuple(value) if isinstance(value, tuple) else (value,)


def run_sweep(sweep: SweepConfig, jobs: int = 1) -> list[tuple[object, dict]]:
    values = sorted(sweep.values, key=_sort_key)
    docs = [variant_document(sweep.base, sweep.parameter, v) for v in values]
    for doc in docs:
        parse_scenario(doc)  # reject bad variants before running any
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_variant, docs))
    else:
        rows = [run_variant(doc) for doc in docs]
    return list(zip(values, rows))


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, float) and math.isinf(x):
        return "not settled"
    if isinstance(x, float) and math.isnan(x):
        return ""
    return fmt(x)


def sweep_table(parameter: str, results: list[tuple[object, dict]]) -> str:
    columns = []
    for _, row in results:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([parameter] + columns)
    for value, row in results:
        label = ";".join(fmt(v) for v in value) if isinstance(value, tuple) else fmt(value)
        writer.writerow([label] + [_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def write_sweep(sweep: SweepConfig, out_dir: Path, jobs: int = 1) -> Path:
    results = run_sweep(sweep, jobs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"sweep_{sweep.parameter}.csv"
    path.write_text(sweep_table(sweep.parameter, results))
    return path
