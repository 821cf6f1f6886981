"""Desired joint trajectories with analytic first and second derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError

__all__ = [
    "TrajectorySample",
    "Hold",
    "StepSequence",
    "Quintic",
    "Sinusoid",
    "TrajectorySpec",
    "evaluate",
    "SWITCH_TOLERANCE",
]

# A step fires at t >= t_switch - SWITCH_TOLERANCE, so that sample times built
# as k*h land on the new target when k*h equals the switch time up to rounding.
SWITCH_TOLERANCE = 1e-9


class TrajectorySample:
    """Desired position, velocity and acceleration at time ``t``."""

    __slots__ = ("t", "q_d", "qd_d", "qdd_d")

    def __init__(self, t, q_d, qd_d, qdd_d):
        arrays = []
        for name, v in (("q_d", q_d), ("qd_d", qd_d), ("qdd_d", qdd_d)):
            arr = np.array(v, dtype=float).reshape(-1)
            if not np.all(np.isfinite(arr)):
                raise InputError(f"trajectory sample {name} contains non-finite values")
            arr.flags.writeable = False
            arrays.append(arr)
        if not arrays[0].size == arrays[1].size == arrays[2].size:
            raise InputError("trajectory sample vectors differ in length")
        self.t = float(t)
        self.q_d, self.qd_d, self.qdd_d = arrays

    @property
    def n(self) -> int:
        return self.q_d.size

    def __repr__(self):
        return (
            f"TrajectorySample(t={self.t}, q_d={self.q_d.tolist()}, "
            f"qd_d={self.qd_d.tolist()}, qdd_d={self.qdd_d.tolist()})"
        )


def _vec(values, name: str, n: int | None = None) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    if n is not None and arr.size != n:
        raise InputError(f"{name} must have length {n}, got {arr.size}")
    return tuple(arr.tolist())


def _scalar(value, name: str) -> float:
    if isinstance(value, bool):
        raise InputError(f"{name} must be a number")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise InputError(f"{name} must be finite")
    return x


class _Base:
    kind: str = ""

    @property
    def n(self) -> int:
        raise NotImplementedError

    def sample(self, t: float):
        """(q_d, qd_d, qdd_d) as lists of floats; the simulator's fast path."""
        raise NotImplementedError

    def evaluate(self, t: float) -> TrajectorySample:
        t = _scalar(t, "t")
        if t < 0.0:
            raise InputError(f"trajectory time must be >= 0, got {t}")
        return TrajectorySample(t, *self.sample(t))


@dataclass(frozen=True)
class Hold(_Base):
    """Constant target with zero derivatives."""

    point: tuple[float, ...]
    kind = "hold"

    def __post_init__(self):
        object.__setattr__(self, "point", _vec(self.point, "hold point"))

    @property
    def n(self):
        return len(self.point)

    def sample(self, t):
        zero = [0.0] * self.n
        return list(self.point), zero, list(zero)


@dataclass(frozen=True)
class StepSequence(_Base):
    """Piecewise-constant target.

    ``initial`` applies before the first switch; ``steps`` is a list of
    ``(switch_time, target)`` pairs with strictly increasing times. Velocity and
    acceleration are zero everywhere, including at the switch instants.
    """

    initial: tuple[float, ...]
    steps: tuple[tuple[float, tuple[float, ...]], ...] = ()
    kind = "step_sequence"

    def __post_init__(self):
        initial = _vec(self.initial, "step initial")
        n = len(initial)
        steps = []
        prev = -math.inf
        for entry in self.steps:
            try:
                t_switch, target = entry
            except (TypeError, ValueError):
                raise InputError(f"step entries must be (time, target) pairs, got {entry!r}") from None
            t_switch = _scalar(t_switch, "step time")
            if t_switch < 0.0:
                raise InputError(f"step times must be >= 0, got {t_switch}")
            if not t_switch > prev:
                raise InputError("step switch times must be strictly increasing")
            prev = t_switch
            steps.append((t_switch, _vec(target, "step target", n)))
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "steps", tuple(steps))

    @property
    def n(self):
        return len(self.initial)

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(ts for ts, _ in self.steps)

    def sample(self, t):
        target = self.initial
        for t_switch, point in self.steps:
            if t >= t_switch - SWITCH_TOLERANCE:
                target = point
            else:
                break
        zero = [0.0] * self.n
        return list(target), zero, list(zero)


@dataclass(frozen=True)
class Quintic(_Base):
    """Rest-to-rest move ``q0 -> qf`` over ``duration`` seconds.

    Uses the minimum-jerk blend ``10 s^3 - 15 s^4 + 6 s^5`` with
    ``s = (t - t0) / duration`` clamped to ``[0, 1]``.
    """

    q0: tuple[float, ...]
    qf: tuple[float, ...]
    duration: float
    t0: float = 0.0
    kind = "quintic"

    def __post_init__(self):
        q0 = _vec(self.q0, "quintic q0")
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "qf", _vec(self.qf, "quintic qf", len(q0)))
        duration = _scalar(self.duration, "quintic duration")
        if duration <= 0.0:
            raise InputError(f"quintic duration must be > 0, got {duration}")
        object.__setattr__(self, "duration", duration)
        t0 = _scalar(self.t0, "quintic t0")
        if t0 < 0.0:
            raise InputError(f"quintic t0 must be >= 0, got {t0}")
        object.__setattr__(self, "t0", t0)

    @property
    def n(self):
        return len(self.q0)

    def sample(self, t):
        T = self.duration
        s = (t - self.t0) / T
        if s <= 0.0:
            zero = [0.0] * self.n
            return list(self.q0), zero, list(zero)
        if s >= 1.0:
            zero = [0.0] * self.n
            return list(self.qf), zero, list(zero)
        s2 = s * s
        s3 = s2 * s
        blend = s3 * (10.0 - 15.0 * s + 6.0 * s2)
        dblend = 30.0 * s2 * (1.0 - 2.0 * s + s2) / T
        ddblend = 60.0 * s * (1.0 - 3.0 * s + 2.0 * s2) / (T * T)
        deltas = [b - a for a, b in zip(self.q0, self.qf)]
        return (
            [a + d * blend for a, d in zip(self.q0, deltas)],
            [d * dblend for d in deltas],
            [d * ddblend for d in deltas],
        )


@dataclass(frozen=True)
class Sinusoid(_Base):
    """``q_d = offset + amplitude * sin(2 pi f t)`` per joint."""

    offset: tuple[float, ...]
    amplitude: tuple[float, ...]
    frequency: tuple[float, ...]
    kind = "sinusoid"

    def __post_init__(self):
        offset = _vec(self.offset, "sinusoid offset")
        n = len(offset)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "amplitude", _vec(self.amplitude, "sinusoid amplitude", n))
        freq = _vec(self.frequency, "sinusoid frequency", n)
        if any(f < 0.0 for f in freq):
            raise InputError(f"sinusoid frequency must be >= 0, got {list(freq)}")
        object.__setattr__(self, "frequency", freq)

    @property
    def n(self):
        return len(self.offset)

    def sample(self, t):
        q, qd, qdd = [], [], []
        for c, a, f in zip(self.offset, self.amplitude, self.frequency):
            w = 2.0 * math.pi * f
            sn, cs = math.sin(w * t), math.cos(w * t)
            q.append(c + a * sn)
            qd.append(a * w * cs)
            qdd.append(-a * w * w * sn)
        return q, qd, qdd


TrajectorySpec = Union[Hold, StepSequence, Quintic, Sinusoid]


def evaluate(spec: TrajectorySpec, t: float) -> TrajectorySample:
    """Desired sample of ``spec`` at time ``t >= 0``."""
    if not isinstance(spec, _Base):
        raise InputError(f"not a trajectory spec: {spec!r}")
    return spec.evaluate(t)

