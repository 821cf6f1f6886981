"""Computed-torque control law and settling-time gain tuning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dynamics
from .dynamics import JointState, MechanismModel
from .errors import InputError
from .trajectory import TrajectorySample

__all__ = [
    "SETTLING_FRACTION",
    "GainSchedule",
    "ControllerConfig",
    "settling_residual",
    "solve_settling_constant",
    "tune_gains",
    "commanded_acceleration",
    "computed_torque",
    "pd_torque",
]

SETTLING_FRACTION = 0.02


def settling_residual(p: float, fraction: float = SETTLING_FRACTION) -> float:
    """``(1 + p) exp(-p) - fraction``: the normalized critically damped error
    at ``omega0 * t = p`` minus the settling band."""
    return (1.0 + p) * math.exp(-p) - fraction


@lru_cache(maxsize=None)
def solve_settling_constant(fraction: float = SETTLING_FRACTION) -> float:
    """Positive root ``P`` of ``(1 + P) exp(-P) = fraction``.

    ``omega0 = P / T_s`` makes a critically damped error released from rest
    decay to ``fraction`` of its initial value exactly at ``T_s``. The root is
    bracketed on ``[1, 20]`` (valid for the default 2 % band), narrowed by
    bisection and polished with Newton steps; ``f'(p) = -p exp(-p)``.
    """
    if not 0.0 < fraction < 1.0:
        raise InputError(f"settling fraction must be in (0, 1), got {fraction}")
    lo, hi = 1.0, 20.0
    if not settling_residual(lo, fraction) > 0.0 > settling_residual(hi, fraction):
        raise InputError(f"settling root for fraction {fraction} is not bracketed by [1, 20]")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if settling_residual(mid, fraction) > 0.0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    for _ in range(5):
        step = settling_residual(p, fraction) / (-p * math.exp(-p))
        p -= step
        if abs(step) <= 1e-16 * p:
            break
    return p


def _positive_vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise InputError(f"{name} entries must be finite and > 0, got {arr.tolist()}")
    return arr


@dataclass(frozen=True, eq=False)
class GainSchedule:
    """Diagonal PD gains, one entry per joint.

    ``ts`` is the design settling time of each joint; ``omega0`` the natural
    frequency; ``kp``/``kv`` the diagonals of the position and velocity gain
    matrices.
    """

    ts: np.ndarray
    omega0: np.ndarray
    kp: np.ndarray
    kv: np.ndarray

    def __post_init__(self):
        n = None
        for name in ("ts", "omega0", "kp", "kv"):
            arr = _positive_vector(getattr(self, name), name)
            if n is not None and arr.size != n:
                raise InputError(f"gain vector {name} has {arr.size} entries, expected {n}")
            n = arr.size
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.kp.size

    @classmethod
    def from_gains(cls, kp, kv) -> "GainSchedule":
        """Schedule from explicit critically damped gains (``kv**2 == 4 kp``)."""
        kp = _positive_vector(kp, "kp")
        kv = _positive_vector(kv, "kv")
        if kp.size != kv.size:
            raise InputError(f"kp has {kp.size} entries but kv has {kv.size}")
        omega0 = kv / 2.0
        if not np.allclose(omega0**2, kp, rtol=1e-9, atol=0.0):
            raise InputError("explicit gains must be critically damped: kv**2 == 4*kp")
        return cls(ts=solve_settling_constant() / omega0, omega0=omega0, kp=kp, kv=kv)


def tune_gains(ts) -> GainSchedule:
    """Critically damped gains meeting per-joint settling times ``ts`` [s]."""
    ts = _positive_vector(ts, "ts")
    omega0 = solve_settling_constant() / ts
    return GainSchedule(ts=ts, omega0=omega0, kp=omega0 * omega0, kv=2.0 * omega0)


@dataclass(frozen=True)
class ControllerConfig:
    """Gains plus the model the controller believes (may differ from the plant)."""

    gains: GainSchedule
    control_model: MechanismModel

    def __post_init__(self):
        if self.control_model.n != self.gains.n:
            raise InputError(
                f"gains have {self.gains.n} joints, control model has {self.control_model.n}"
            )


def _check(gains: GainSchedule, state: JointState, desired: TrajectorySample):
    if state.n != gains.n or desired.n != gains.n:
        raise InputError(
            f"dimension mismatch: gains {gains.n}, state {state.n}, desired {desired.n}"
        )


def commanded_acceleration(
    gains: GainSchedule, state: JointState, desired: TrajectorySample
) -> np.ndarray:
    """``v = qdd_d - Kp (q - q_d) - Kv (qd - qd_d)``, joint by joint."""
    _check(gains, state, desired)
    return desired.qdd_d - gains.kp * (state.q - desired.q_d) - gains.kv * (state.qdot - desired.qd_d)


def computed_torque(
    cfg: ControllerConfig, state: JointState, desired: TrajectorySample
) -> np.ndarray:
    """Computed-torque law: inverse dynamics of the control model at ``v``.

    Only the measured ``q`` and ``qdot`` enter; with an exact model the plant
    then accelerates at exactly ``v``.
    """
    v = commanded_acceleration(cfg.gains, state, desired)
    return dynamics.inverse_dynamics(cfg.control_model, state, v)


def pd_torque(gains: GainSchedule, state: JointState, desired: TrajectorySample) -> np.ndarray:
    """Model-free baseline ``u = -Kp (q - q_d) - Kv (qd - qd_d)``."""
    _check(gains, state, desired)
    return -gains.kp * (state.q - desired.q_d) - gains.kv * (state.qdot - desired.qd_d)


def _torque_floats(cfg: ControllerConfig, q, qdot, q_d, qd_d, qdd_d) -> list[float]:
    """Float-list twin of :func:`computed_torque` for the simulation loop."""
    kp, kv = cfg.gains.kp.tolist(), cfg.gains.kv.tolist()
    v = [
        qdd_d[i] - kp[i] * (q[i] - q_d[i]) - kv[i] * (qdot[i] - qd_d[i])
        for i in range(len(q))
    ]
    return dynamics._inverse(cfg.control_model, q, qdot, v)


def _pd_floats(gains: GainSchedule, q, qdot, q_d, qd_d, qdd_d) -> list[float]:
    kp, kv = gains.kp.tolist(), gains.kv.tolist()
    return [-kp[i] * (q[i] - q_d[i]) - kv[i] * (qdot[i] - qd_d[i]) for i in range(len(q))]
