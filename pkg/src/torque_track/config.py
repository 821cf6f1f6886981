"""JSON scenario, model and sweep documents.

Parsing is strict: unknown keys are rejected, and every error names the
offending key path (``sim.h``, ``model.links[1].mass``, ...).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .controller import GainSchedule, tune_gains
from .dynamics import JointState, LinkParams, MechanismModel
from .errors import InputError
from .simulator import ModelScaling, PulseSpec, SimulationConfig
from .trajectory import Hold, Quintic, Sinusoid, StepSequence, TrajectorySpec

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SweepConfig",
    "SWEEP_PARAMETERS",
    "bundled_files",
    "resolve_path",
    "load_json",
    "parse_model",
    "parse_scenario",
    "parse_sweep",
    "load_scenario",
    "load_model",
    "load_sweep",
    "model_to_dict",
]

SWEEP_PARAMETERS = ("ts", "mass_scale", "torque_limit", "control_period")


class ConfigError(InputError):
    """Invalid configuration document; ``key`` is the offending key path."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    model: MechanismModel
    gains: GainSchedule
    trajectory: TrajectorySpec
    sim: SimulationConfig
    law: str = "computed_torque"
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.model.n


@dataclass(frozen=True)
class SweepConfig:
    base: dict
    base_dir: Path
    parameter: str
    values: tuple


# ---------------------------------------------------------------------------
# primitive readers


def _obj(data, key: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(key, f"expected an object, got {type(data).__name__}")
    allowed = set(required) | set(optional)
    for name in data:
        if name not in allowed:
            where = f"{key}.{name}" if key else name
            raise ConfigError(where, f"unknown key (allowed: {', '.join(sorted(allowed))})")
    for name in required:
        if name not in data:
            where = f"{key}.{name}" if key else name
            raise ConfigError(where, "missing required key")
    return data


def _num(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(key, "must be finite")
    return x


def _vec(value, key: str, n: int | None = None, broadcast: bool = False) -> list[float]:
    if isinstance(value, list):
        if any(isinstance(v, list) for v in value):
            raise ConfigError(key, "expected a flat vector, got a nested list (matrices are not supported)")
        out = [_num(v, f"{key}[{i}]") for i, v in enumerate(value)]
        if not out:
            raise ConfigError(key, "must not be empty")
    elif broadcast and n is not None:
        out = [_num(value, key)] * n
    else:
        raise ConfigError(key, f"expected a list of numbers, got {value!r}")
    if n is not None and len(out) != n:
        if broadcast and len(out) == 1:
            return out * n
        raise ConfigError(key, f"expected {n} entries, got {len(out)}")
    return out


def _wrap(key: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except InputError as exc:
        raise ConfigError(key, str(exc)) from None


# ---------------------------------------------------------------------------
# sections


def parse_model(data, key: str = "model") -> MechanismModel:
    data = _obj(data, key, ("links",), ("gravity",))
    links_data = data["links"]
    if not isinstance(links_data, list) or not links_data:
        raise ConfigError(f"{key}.links", "expected a non-empty list of links")
    links = []
    for i, raw in enumerate(links_data):
        lk = f"{key}.links[{i}]"
        raw = _obj(raw, lk, ("mass", "length", "com_distance"), ("inertia_com", "damping"))
        values = {name: _num(v, f"{lk}.{name}") for name, v in raw.items()}
        for name, v in values.items():
            if v < 0.0 or (name in ("mass", "length") and v == 0.0):
                bound = "> 0" if name in ("mass", "length") else ">= 0"
                raise ConfigError(f"{lk}.{name}", f"must be {bound}, got {v}")
        if values["com_distance"] > values["length"]:
            raise ConfigError(f"{lk}.com_distance", "must not exceed the link length")
        links.append(_wrap(lk, LinkParams, **values))
    gravity = _num(data.get("gravity", 9.81), f"{key}.gravity")
    return MechanismModel(tuple(links), gravity)


def _parse_gains(data, n: int, key: str = "controller"):
    data = _obj(data, key, (), ("ts", "kp", "kv", "mismatch", "law"))
    has_ts = "ts" in data
    has_k = "kp" in data or "kv" in data
    if has_ts == has_k:
        raise ConfigError(key, "give either ts or both kp and kv")
    if has_ts:
        ts = _vec(data["ts"], f"{key}.ts", n, broadcast=True)
        if any(t <= 0.0 for t in ts):
            raise ConfigError(f"{key}.ts", f"settling times must be > 0, got {ts}")
        gains = tune_gains(ts)
    else:
        for name in ("kp", "kv"):
            if name not in data:
                raise ConfigError(f"{key}.{name}", "missing required key (kp and kv go together)")
        kp = _vec(data["kp"], f"{key}.kp", n, broadcast=True)
        kv = _vec(data["kv"], f"{key}.kv", n, broadcast=True)
        gains = _wrap(f"{key}.kp", GainSchedule.from_gains, kp, kv)
    mismatch = None
    if data.get("mismatch") is not None:
        mk = f"{key}.mismatch"
        raw = _obj(data["mismatch"], mk, ("mass_scale",))
        scale = _vec(raw["mass_scale"], f"{mk}.mass_scale", n, broadcast=True)
        mismatch = _wrap(f"{mk}.mass_scale", ModelScaling, tuple(scale))
    law = data.get("law", "computed_torque")
    if law not in ("computed_torque", "pd"):
        raise ConfigError(f"{key}.law", f"expected 'computed_torque' or 'pd', got {law!r}")
    return gains, mismatch, law


def _parse_trajectory(data, n: int, key: str = "trajectory") -> TrajectorySpec:
    if not isinstance(data, dict):
        raise ConfigError(key, "expected an object")
    kind = data.get("kind")
    if kind == "hold":
        raw = _obj(data, key, ("kind", "point"))
        return Hold(tuple(_vec(raw["point"], f"{key}.point", n)))
    if kind == "step_sequence":
        raw = _obj(data, key, ("kind", "initial"), ("steps",))
        initial = _vec(raw["initial"], f"{key}.initial", n)
        steps_raw = raw.get("steps", [])
        if not isinstance(steps_raw, list):
            raise ConfigError(f"{key}.steps", "expected a list of [time, target] pairs")
        steps = []
        for i, entry in enumerate(steps_raw):
            sk = f"{key}.steps[{i}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise ConfigError(sk, "expected a [time, target] pair")
            steps.append((_num(entry[0], f"{sk}[0]"), tuple(_vec(entry[1], f"{sk}[1]", n))))
        return _wrap(f"{key}.steps", StepSequence, tuple(initial), tuple(steps))
    if kind == "quintic":
        raw = _obj(data, key, ("kind", "q0", "qf", "duration"), ("t0",))
        return _wrap(
            key,
            Quintic,
            tuple(_vec(raw["q0"], f"{key}.q0", n)),
            tuple(_vec(raw["qf"], f"{key}.qf", n)),
            _num(raw["duration"], f"{key}.duration"),
            _num(raw.get("t0", 0.0), f"{key}.t0"),
        )
    if kind == "sinusoid":
        raw = _obj(data, key, ("kind", "offset", "amplitude", "frequency"))
        return _wrap(
            key,
            Sinusoid,
            tuple(_vec(raw["offset"], f"{key}.offset", n)),
            tuple(_vec(raw["amplitude"], f"{key}.amplitude", n, broadcast=True)),
            tuple(_vec(raw["frequency"], f"{key}.frequency", n, broadcast=True)),
        )
    raise ConfigError(f"{key}.kind", f"expected one of hold, step_sequence, quintic, sinusoid; got {kind!r}")


def _parse_sim(data, n: int, mismatch, key: str = "sim") -> SimulationConfig:
    data = _obj(
        data, key, ("t_end",),
        ("h", "control_period", "torque_limit", "perturbations", "initial_state"),
    )
    t_end = _num(data["t_end"], f"{key}.t_end")
    h = _num(data.get("h", 1e-4), f"{key}.h")
    period = _num(data.get("control_period", 1e-3), f"{key}.control_period")
    if not h > 0.0:
        raise ConfigError(f"{key}.h", f"must be > 0, got {h}")
    if h > period:
        raise ConfigError(f"{key}.h", f"must not exceed control_period ({period}), got {h}")
    if period > t_end:
        raise ConfigError(f"{key}.control_period", f"must not exceed t_end ({t_end}), got {period}")
    ratio = period / h
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ConfigError(f"{key}.control_period", f"must be an integer multiple of h ({h})")
    limit = None
    if data.get("torque_limit") is not None:
        limit = _vec(data["torque_limit"], f"{key}.torque_limit", n, broadcast=True)
        if any(x <= 0.0 for x in limit):
            raise ConfigError(f"{key}.torque_limit", f"entries must be > 0, got {limit}")
        limit = tuple(limit)
    pulses = []
    pulses_raw = data.get("perturbations", [])
    if not isinstance(pulses_raw, list):
        raise ConfigError(f"{key}.perturbations", "expected a list")
    for i, raw in enumerate(pulses_raw):
        pk = f"{key}.perturbations[{i}]"
        raw = _obj(raw, pk, ("joint", "t_start", "duration", "magnitude"))
        joint = raw["joint"]
        if isinstance(joint, bool) or not isinstance(joint, int) or not 0 <= joint < n:
            raise ConfigError(f"{pk}.joint", f"expected a joint index in [0, {n}), got {joint!r}")
        pulses.append(
            _wrap(
                pk, PulseSpec, joint,
                _num(raw["t_start"], f"{pk}.t_start"),
                _num(raw["duration"], f"{pk}.duration"),
                _num(raw["magnitude"], f"{pk}.magnitude"),
            )
        )
    init = _obj(data.get("initial_state", {}), f"{key}.initial_state", (), ("q", "qdot"))
    q0 = _vec(init.get("q", [0.0] * n), f"{key}.initial_state.q", n)
    v0 = _vec(init.get("qdot", [0.0] * n), f"{key}.initial_state.qdot", n)
    return _wrap(
        key, SimulationConfig, t_end, JointState(q0, v0), h=h, control_period=period,
        torque_limit=limit, perturbations=tuple(pulses), mismatch=mismatch,
    )


def parse_scenario(data: dict) -> ScenarioConfig:
    """Validate a scenario document and build the run objects."""
    data = _obj(data, "", ("model", "controller", "trajectory", "sim"), ("outputs", "description"))
    model = parse_model(data["model"])
    n = model.n
    gains, mismatch, law = _parse_gains(data["controller"], n)
    traj = _parse_trajectory(data["trajectory"], n)
    sim = _parse_sim(data["sim"], n, mismatch)
    outputs = _obj(data.get("outputs", {}), "outputs", (), ("csv", "plot"))
    for name, value in outputs.items():
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"outputs.{name}", "expected a path string or null")
    return ScenarioConfig(
        model=model, gains=gains, trajectory=traj, sim=sim, law=law, outputs=dict(outputs), raw=data
    )


def parse_sweep(data: dict, base_dir: Path) -> SweepConfig:
    data = _obj(data, "", ("base", "parameter", "values"), ("description",))
    base = data["base"]
    if isinstance(base, str):
        base = load_json(resolve_path(base, base_dir), key="base")
    elif not isinstance(base, dict):
        raise ConfigError("base", "expected a scenario object or a path")
    parse_scenario(base)
    parameter = data["parameter"]
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError("parameter", f"expected one of {', '.join(SWEEP_PARAMETERS)}; got {parameter!r}")
    values = data["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("values", "expected a non-empty list")
    checked = []
    for i, v in enumerate(values):
        if isinstance(v, list):
            checked.append(tuple(_vec(v, f"values[{i}]")))
        else:
            checked.append(_num(v, f"values[{i}]"))
    return SweepConfig(base=base, base_dir=base_dir, parameter=parameter, values=tuple(checked))


# ---------------------------------------------------------------------------
# files


BUNDLED_DIRS = ("scenarios", "models")


def bundled_files() -> dict[str, Path]:
    """Bundled scenario and model documents by file name."""
    out = {}
    for sub in BUNDLED_DIRS:
        root = resources.files("torque_track") / sub
        out.update({p.name: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")})
    return out


def resolve_path(name: str | Path, base_dir: Path | None = None) -> Path:
    """A real file path, falling back to the bundled document of that name."""
    path = Path(name)
    if not path.is_absolute() and base_dir is not None and (base_dir / path).exists():
        return base_dir / path
    if path.exists():
        return path
    bundled = bundled_files()
    if path.name in bundled and len(path.parts) == 1:
        return bundled[path.name]
    raise ConfigError("", f"no such file: {name}")


def load_json(path: Path, key: str = "") -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(key, f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(key, f"{path} is not valid JSON: {exc}") from None


def load_scenario(name: str | Path) -> ScenarioConfig:
    return parse_scenario(load_json(resolve_path(name)))


def load_model(name: str | Path) -> MechanismModel:
    return parse_model(load_json(resolve_path(name)))


def load_sweep(name: str | Path) -> SweepConfig:
    path = resolve_path(name)
    return parse_sweep(load_json(path), path.parent)


def model_to_dict(model: MechanismModel) -> dict:
    """Model document (the ``model`` section of a scenario)."""
    return {
        "gravity": model.gravity,
        "links": [
            {
                "mass": lk.mass,
                "length": lk.length,
                "com_distance": lk.com_distance,
                "inertia_com": lk.inertia_com,
                "damping": lk.damping,
            }
            for lk in model.links
        ],
    }

