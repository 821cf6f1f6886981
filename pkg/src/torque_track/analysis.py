"""Closed-form critically damped error, settling-time measurement and trace
metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .controller import SETTLING_FRACTION, GainSchedule
from .errors import InputError
from .simulator import Trace

__all__ = [
    "NOT_SETTLED",
    "AnalyticOscillator",
    "analytic_error",
    "measured_settling_time",
    "compare_to_oracle",
    "disturbance_settling",
    "JointSummary",
    "SummaryReport",
    "summarize",
]

# Returned by measured_settling_time when the error never stays in the band.
NOT_SETTLED = math.inf


@dataclass(frozen=True)
class AnalyticOscillator:
    """Critically damped error ``x(t) = (c1 + c2 t) exp(-omega0 t)``.

    Solves ``x'' + 2 omega0 x' + omega0^2 x = 0`` with ``x(0) = x0`` and
    ``x'(0) = v0``.
    """

    omega0: float
    x0: float
    v0: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0.0 and math.isfinite(self.omega0)):
            raise InputError(f"omega0 must be finite and > 0, got {self.omega0}")
        if not (math.isfinite(self.x0) and math.isfinite(self.v0)):
            raise InputError("initial conditions must be finite")

    @property
    def c1(self) -> float:
        return self.x0

    @property
    def c2(self) -> float:
        return self.v0 + self.x0 * self.omega0


def analytic_error(osc: AnalyticOscillator, t):
    """Evaluate the closed-form error at ``t >= 0`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise InputError("analytic_error needs t >= 0")
    out = (osc.c1 + osc.c2 * t_arr) * np.exp(-osc.omega0 * t_arr)
    return float(out) if out.ndim == 0 else out


def measured_settling_time(eps, dt: float, threshold: float = SETTLING_FRACTION) -> float:
    """Time after which ``|eps|`` stays within ``threshold * |eps[0]|``.

    ``eps`` is uniformly sampled with period ``dt``, starting at the reference
    instant. Returns the first sample time from which every later sample is in
    the band, ``0.0`` when ``eps[0] == 0``, and :data:`NOT_SETTLED` when the
    last sample is still outside.
    """
    series = np.abs(np.asarray(eps, dtype=float).reshape(-1))
    if series.size == 0:
        raise InputError("settling time of an empty series")
    if not dt > 0.0:
        raise InputError(f"sample period must be > 0, got {dt}")
    if not 0.0 < threshold < 1.0:
        raise InputError(f"threshold must be in (0, 1), got {threshold}")
    if series[0] == 0.0:
        return 0.0
    outside = np.flatnonzero(series > threshold * series[0])
    if outside.size == 0:
        return 0.0
    last = int(outside[-1])
    if last == series.size - 1:
        return NOT_SETTLED
    return (last + 1) * dt


def _joint(trace: Trace, joint: int) -> int:
    if isinstance(joint, bool) or not isinstance(joint, (int, np.integer)) or not 0 <= joint < trace.n:
        raise InputError(f"joint index {joint!r} out of range for {trace.n} joints")
    return int(joint)


def compare_to_oracle(
    trace: Trace,
    gains: GainSchedule,
    joint: int,
    t0: float | None = None,
    t1: float = math.inf,
) -> float:
    """Max deviation of the simulated error from the closed-form solution.

    The oracle starts from the recorded ``eps`` and ``eps_dot`` at the first
    sample of the window ``[t0, t1)`` (default: whole trace). Meant for
    constant-reference segments of exact-model runs.
    """
    j = _joint(trace, joint)
    if gains.n != trace.n:
        raise InputError(f"gains have {gains.n} joints, trace has {trace.n}")
    rows = trace.window(trace.t[0] if t0 is None else t0, t1)
    t = trace.t[rows]
    if t.size == 0:
        raise InputError("empty comparison window")
    eps = trace.eps[rows, j]
    osc = AnalyticOscillator(float(gains.omega0[j]), float(eps[0]), float(trace.eps_dot[rows, j][0]))
    return float(np.max(np.abs(eps - analytic_error(osc, t - t[0]))))


def disturbance_settling(
    trace: Trace, joint: int, t_start: float, t_end: float = math.inf,
    threshold: float = SETTLING_FRACTION,
) -> tuple[float, float]:
    """Re-settling after a disturbance that begins at ``t_start``.

    Finds the peak ``|eps|`` in ``[t_start, t_end)`` and measures the settling
    time from that peak, relative to the peak value. At the peak ``eps_dot``
    is (to sampling accuracy) zero, which is the case the settling-time gain
    design covers. Returns ``(peak_time, settling_time_from_peak)``.
    """
    j = _joint(trace, joint)
    rows = trace.window(t_start, t_end)
    eps = trace.eps[rows, j]
    if eps.size == 0:
        raise InputError("empty disturbance window")
    k = int(np.argmax(np.abs(eps)))
    peak_time = float(trace.t[rows][k])
    return peak_time, measured_settling_time(eps[k:], trace.h, threshold)


@dataclass
class JointSummary:
    settling_time: float
    rms_error: float
    peak_torque: float
    saturation_duty: float
    oracle_deviation: float = 0.0
    segment_settling: list[float] = field(default_factory=list)
    disturbance_settling: list[float] = field(default_factory=list)


@dataclass
class SummaryReport:
    joints: list[JointSummary]
    energy_drift: float
    t_end: float
    samples: int

    @property
    def settled(self) -> bool:
        return all(math.isfinite(j.settling_time) for j in self.joints)

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else "not settled"

        return {
            "settled": self.settled,
            "t_end": self.t_end,
            "samples": self.samples,
            "energy_drift": self.energy_drift,
            "joints": [
                {
                    "settling_time": num(j.settling_time),
                    "rms_error": j.rms_error,
                    "peak_torque": j.peak_torque,
                    "saturation_duty": j.saturation_duty,
                    "oracle_deviation": j.oracle_deviation,
                    "segment_settling": [num(x) for x in j.segment_settling],
                    "disturbance_settling": [num(x) for x in j.disturbance_settling],
                }
                for j in self.joints
            ],
        }


def _segments(trace: Trace) -> tuple[list[tuple[float, float]], list[tuple[int, float, float]]]:
    """Constant-reference segments and disturbance windows of a trace.

    A segment starts at t=0 or at a step switch and ends at the next switch or
    pulse start. A disturbance window starts at a pulse and ends at the next
    switch or pulse start.
    """
    switches = sorted(trace.events.get("switch_times", ()))
    pulses = sorted(trace.events.get("pulses", ()), key=lambda p: p[1])
    starts = sorted({float(trace.t[0]), *switches})
    boundaries = sorted(set(switches) | {p[1] for p in pulses})

    def next_boundary(t):
        later = [b for b in boundaries if b > t + 1e-9]
        return later[0] if later else math.inf

    segments = [(s, next_boundary(s)) for s in starts]
    windows = [(j, t0, next_boundary(t0)) for j, t0, _ in pulses]
    return segments, windows


def summarize(trace: Trace, gains: GainSchedule, threshold: float = SETTLING_FRACTION) -> SummaryReport:
    """Per-joint scalar summary of a closed-loop trace.

    ``settling_time`` is the worst settling time over the constant-reference
    segments (segments that start with zero error count as 0), and
    ``oracle_deviation`` the worst :func:`compare_to_oracle` over the same
    segments. Disturbance re-settling is reported separately, measured from
    each post-pulse peak.
    """
    if gains.n != trace.n:
        raise InputError(f"gains have {gains.n} joints, trace has {trace.n}")
    segments, windows = _segments(trace)
    joints = []
    for j in range(trace.n):
        seg_times = []
        deviation = 0.0
        for t0, t1 in segments:
            rows = trace.window(t0, t1)
            if rows.start >= rows.stop:
                continue
            seg_times.append(measured_settling_time(trace.eps[rows, j], trace.h, threshold))
            deviation = max(deviation, compare_to_oracle(trace, gains, j, t0, t1))
        dist_times = [
            disturbance_settling(trace, j, t0, t1, threshold)[1] for (_, t0, t1) in windows
        ]
        u = trace.u[:, j]
        clamped = trace.u[:, j] != trace.u_raw[:, j]
        joints.append(
            JointSummary(
                settling_time=max(seg_times) if seg_times else 0.0,
                rms_error=float(np.sqrt(np.mean(trace.eps[:, j] ** 2))),
                peak_torque=float(np.max(np.abs(u))),
                saturation_duty=float(np.mean(clamped)),
                oracle_deviation=deviation,
                segment_settling=seg_times,
                disturbance_settling=dist_times,
            )
        )
    drift = float(np.max(np.abs(trace.energy - trace.energy[0])))
    return SummaryReport(joints=joints, energy_drift=drift, t_end=float(trace.t[-1]), samples=len(trace))
