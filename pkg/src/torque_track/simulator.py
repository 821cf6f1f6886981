"""Closed-loop simulation: plant + computed-torque law under zero-order hold.

The plant is integrated with fixed-step classical RK4 at step ``h``. Every
``control_period`` the controller samples ``(q, qdot)``, computes a torque,
optionally clamps it, and holds it until the next control instant. External
pulse torques act on the plant only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import controller as ctl
from . import dynamics
from .dynamics import JointState, MechanismModel
from .errors import InputError, NumericalError
from .trajectory import TrajectorySpec

__all__ = [
    "PulseSpec",
    "ModelScaling",
    "SimulationConfig",
    "Trace",
    "plant_derivative",
    "rk4_step",
    "controller_for",
    "simulate",
    "PassiveRun",
    "simulate_passive",
]

# Relative slack when checking that control_period is an integer multiple of h.
_RATIO_TOL = 1e-9


@dataclass(frozen=True)
class PulseSpec:
    """Additive torque ``magnitude`` on ``joint`` during ``[t_start, t_start + duration)``."""

    joint: int
    t_start: float
    duration: float
    magnitude: float

    def __post_init__(self):
        if isinstance(self.joint, bool) or not isinstance(self.joint, int) or self.joint < 0:
            raise InputError(f"pulse joint must be a non-negative integer, got {self.joint!r}")
        for name in ("t_start", "duration", "magnitude"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InputError(f"pulse {name} must be finite")
            object.__setattr__(self, name, value)
        if self.duration <= 0.0:
            raise InputError(f"pulse duration must be > 0, got {self.duration}")
        if self.t_start < 0.0:
            raise InputError(f"pulse t_start must be >= 0, got {self.t_start}")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration


@dataclass(frozen=True)
class ModelScaling:
    """Multiplicative error on the controller's link masses (plant unchanged)."""

    mass_scale: tuple[float, ...]

    def __post_init__(self):
        scale = tuple(float(s) for s in np.atleast_1d(self.mass_scale))
        if not scale or any(not (s > 0.0 and math.isfinite(s)) for s in scale):
            raise InputError(f"mass_scale factors must be finite and > 0, got {list(scale)}")
        object.__setattr__(self, "mass_scale", scale)


@dataclass(frozen=True)
class SimulationConfig:
    t_end: float
    initial_state: JointState
    h: float = 1e-4
    control_period: float = 1e-3
    torque_limit: tuple[float, ...] | None = None
    perturbations: tuple[PulseSpec, ...] = ()
    mismatch: ModelScaling | None = None

    def __post_init__(self):
        for name in ("t_end", "h", "control_period"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InputError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.h <= self.control_period <= self.t_end:
            raise InputError(
                "need 0 < h <= control_period <= t_end, got "
                f"h={self.h}, control_period={self.control_period}, t_end={self.t_end}"
            )
        ratio = self.control_period / self.h
        if abs(ratio - round(ratio)) > _RATIO_TOL * ratio:
            raise InputError(
                f"control_period ({self.control_period}) must be an integer multiple of h ({self.h})"
            )
        if not isinstance(self.initial_state, JointState):
            raise InputError("initial_state must be a JointState")
        if self.torque_limit is not None:
            limit = tuple(float(x) for x in np.atleast_1d(self.torque_limit))
            if any(not x > 0.0 for x in limit):
                raise InputError(f"torque_limit entries must be > 0, got {list(limit)}")
            object.__setattr__(self, "torque_limit", limit)
        object.__setattr__(self, "perturbations", tuple(self.perturbations))

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.h))

    @property
    def hold_steps(self) -> int:
        return int(round(self.control_period / self.h))

    def check_dimensions(self, n: int):
        if self.initial_state.n != n:
            raise InputError(f"initial_state has {self.initial_state.n} joints, model has {n}")
        if self.torque_limit is not None and len(self.torque_limit) != n:
            raise InputError(f"torque_limit needs {n} entries, got {len(self.torque_limit)}")
        if self.mismatch is not None and len(self.mismatch.mass_scale) != n:
            raise InputError(f"mass_scale needs {n} entries, got {len(self.mismatch.mass_scale)}")
        for pulse in self.perturbations:
            if pulse.joint >= n:
                raise InputError(f"pulse joint index {pulse.joint} out of range for {n} joints")


@dataclass(frozen=True, eq=False)
class Trace:
    """Uniformly sampled closed-loop record, one row per integrator step.

    Row ``k`` holds the state at ``t[k]``, the desired sample there, the torque
    applied over ``[t[k], t[k+1])`` (after clamping) and the controller's
    unclamped output, and the plant acceleration under that torque plus any
    active pulse.
    """

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray
    q_d: np.ndarray
    qd_d: np.ndarray
    qdd_d: np.ndarray
    eps: np.ndarray
    eps_dot: np.ndarray
    u: np.ndarray
    u_raw: np.ndarray
    energy: np.ndarray
    h: float = 0.0
    control_period: float = 0.0
    events: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in self.array_fields():
            arr = getattr(self, name)
            arr.flags.writeable = False

    @staticmethod
    def array_fields() -> tuple[str, ...]:
        return ("t", "q", "qdot", "qddot", "q_d", "qd_d", "qdd_d", "eps", "eps_dot", "u", "u_raw", "energy")

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def __len__(self) -> int:
        return self.t.size

    def window(self, t0: float, t1: float = math.inf) -> slice:
        """Row slice covering ``t0 <= t < t1`` (with rounding slack)."""
        tol = 1e-9
        start = int(np.searchsorted(self.t, t0 - tol, side="left"))
        stop = int(np.searchsorted(self.t, t1 - tol, side="left")) if math.isfinite(t1) else len(self)
        return slice(start, stop)


def plant_derivative(model: MechanismModel) -> Callable:
    """``f(q, qdot, tau) -> qddot`` for ``model`` on float sequences."""
    return partial(dynamics._forward, model)


def _rk4(accel, q, v, tau, h, a1=None):
    if a1 is None:
        a1 = accel(q, v, tau)
    hh = 0.5 * h
    q2 = [x + hh * y for x, y in zip(q, v)]
    v2 = [x + hh * y for x, y in zip(v, a1)]
    a2 = accel(q2, v2, tau)
    q3 = [x + hh * y for x, y in zip(q, v2)]
    v3 = [x + hh * y for x, y in zip(v, a2)]
    a3 = accel(q3, v3, tau)
    q4 = [x + h * y for x, y in zip(q, v3)]
    v4 = [x + h * y for x, y in zip(v, a3)]
    a4 = accel(q4, v4, tau)
    h6 = h / 6.0
    q_new = [x + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for x, b1, b2, b3, b4 in zip(q, v, v2, v3, v4)]
    v_new = [x + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for x, b1, b2, b3, b4 in zip(v, a1, a2, a3, a4)]
    return q_new, v_new


def _finite(values) -> bool:
    return all(math.isfinite(x) for x in values)


def rk4_step(derivative: Callable, state: JointState, u_held, w, h: float) -> JointState:
    """One classical RK4 step of ``(q, qdot)' = (qdot, f(q, qdot, u + w))``.

    ``u_held`` and ``w`` stay constant across the step.

    Raises:
        InputError: ``h`` not positive.
        NumericalError: the new state is not finite.
    """
    if not h > 0.0:
        raise InputError(f"step size must be > 0, got {h}")
    tau = [a + b for a, b in zip(np.atleast_1d(u_held).tolist(), np.atleast_1d(w).tolist())]
    if len(tau) != state.n:
        raise InputError(f"torque has {len(tau)} entries, state has {state.n}")
    q, v = _rk4(derivative, state.q.tolist(), state.qdot.tolist(), tau, h)
    if not (_finite(q) and _finite(v)):
        raise NumericalError("RK4 step produced non-finite state")
    return JointState(q, v)


def controller_for(
    plant: MechanismModel, gains: ctl.GainSchedule, mismatch: ModelScaling | None = None
) -> ctl.ControllerConfig:
    """Controller config whose model is the plant, mass-scaled when ``mismatch`` is set."""
    model = plant if mismatch is None else plant.with_mass_scale(mismatch.mass_scale)
    return ctl.ControllerConfig(gains=gains, control_model=model)


def _pulse_torque(pulses: Sequence[PulseSpec], n: int, t: float) -> list[float]:
    w = [0.0] * n
    tol = 1e-9
    for p in pulses:
        if p.t_start - tol <= t < p.t_end - tol:
            w[p.joint] += p.magnitude
    return w


def simulate(
    plant: MechanismModel,
    controller_cfg: ctl.ControllerConfig,
    traj: TrajectorySpec,
    sim: SimulationConfig,
    law: str = "computed_torque",
) -> Trace:
    """Run the closed loop and return the full trace.

    ``law`` selects ``"computed_torque"`` (default) or the model-free
    ``"pd"`` baseline.

    Raises:
        InputError: inconsistent dimensions, or a control model that does not
            match the plant under the configured mismatch.
        NumericalError: non-finite state; ``err.partial`` holds the trace up to
            the failure and ``err.time`` the failure time.
    """
    n = plant.n
    sim.check_dimensions(n)
    if controller_cfg.gains.n != n or traj.n != n:
        raise InputError(
            f"dimension mismatch: plant {n}, gains {controller_cfg.gains.n}, trajectory {traj.n}"
        )
    expected = controller_for(plant, controller_cfg.gains, sim.mismatch).control_model
    if controller_cfg.control_model != expected:
        raise InputError("control model must equal the plant with the configured mass scaling applied")
    if law == "computed_torque":
        control = partial(ctl._torque_floats, controller_cfg)
    elif law == "pd":
        control = partial(ctl._pd_floats, controller_cfg.gains)
    else:
        raise InputError(f"unknown control law {law!r}")

    accel = plant_derivative(plant)
    limit = sim.torque_limit
    pulses = sim.perturbations
    h = sim.h
    steps = sim.steps
    hold = sim.hold_steps

    q = sim.initial_state.q.tolist()
    v = sim.initial_state.qdot.tolist()
    u_raw = u = [0.0] * n
    rows = {name: [] for name in Trace.array_fields()}

    def build(count=None):
        arrays = {}
        for name, data in rows.items():
            arr = np.array(data[:count] if count is not None else data, dtype=float)
            if name not in ("t", "energy"):
                arr = arr.reshape(-1, n)
            arrays[name] = arr
        events = {
            "switch_times": list(getattr(traj, "switch_times", ())),
            "pulses": [(p.joint, p.t_start, p.t_end) for p in pulses],
        }
        return Trace(**arrays, h=h, control_period=sim.control_period, events=events)

    for k in range(steps + 1):
        t = k * h
        q_d, qd_d, qdd_d = traj.sample(t)
        if k % hold == 0:
            u_raw = control(q, v, q_d, qd_d, qdd_d)
            if limit is not None:
                u = [min(max(x, -lim), lim) for x, lim in zip(u_raw, limit)]
            else:
                u = u_raw
        w = _pulse_torque(pulses, n, t)
        tau = [a + b for a, b in zip(u, w)]
        try:
            M, bias, sin_phi, cos_phi = dynamics._terms(plant, q, v)
            a1 = dynamics._solve(M, bias, tau)
        except NumericalError as exc:
            raise NumericalError(f"{exc} at t={t}", time=t, partial=build()) from None
        if not (_finite(a1) and _finite(u_raw)):
            raise NumericalError(f"non-finite acceleration or torque at t={t}", time=t, partial=build())
        rows["t"].append(t)
        rows["q"].append(q)
        rows["qdot"].append(v)
        rows["qddot"].append(a1)
        rows["q_d"].append(q_d)
        rows["qd_d"].append(qd_d)
        rows["qdd_d"].append(qdd_d)
        rows["eps"].append([a - b for a, b in zip(q, q_d)])
        rows["eps_dot"].append([a - b for a, b in zip(v, qd_d)])
        rows["u"].append(u)
        rows["u_raw"].append(u_raw)
        rows["energy"].append(dynamics._kinetic(M, v) + dynamics._potential(plant, sin_phi, cos_phi))
        if k == steps:
            break
        q_new, v_new = _rk4(accel, q, v, tau, h, a1)
        if not (_finite(q_new) and _finite(v_new)):
            t_fail = (k + 1) * h
            raise NumericalError(f"state became non-finite at t={t_fail}", time=t_fail, partial=build())
        q, v = q_new, v_new

    return build()


@dataclass(frozen=True, eq=False)
class PassiveRun:
    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    energy: np.ndarray


def simulate_passive(model: MechanismModel, state: JointState, t_end: float, h: float) -> PassiveRun:
    """Zero-torque RK4 run of the plant alone (energy-conservation checks)."""
    if not 0.0 < h <= t_end:
        raise InputError(f"need 0 < h <= t_end, got h={h}, t_end={t_end}")
    if state.n != model.n:
        raise InputError(f"state has {state.n} joints, model has {model.n}")
    accel = plant_derivative(model)
    steps = int(round(t_end / h))
    zero = [0.0] * model.n
    q, v = state.q.tolist(), state.qdot.tolist()
    qs, vs, energy = [q], [v], [dynamics._energy(model, q, v)]
    for k in range(steps):
        q, v = _rk4(accel, q, v, zero, h)
        if not (_finite(q) and _finite(v)):
            raise NumericalError(f"passive run blew up at t={(k + 1) * h}", time=(k + 1) * h)
        qs.append(q)
        vs.append(v)
        energy.append(dynamics._energy(model, q, v))
    return PassiveRun(
        t=np.arange(steps + 1) * h, q=np.array(qs), qdot=np.array(vs), energy=np.array(energy)
    )
