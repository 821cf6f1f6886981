import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torque_track.analysis import (
    NOT_SETTLED,
    AnalyticOscillator,
    analytic_error,
    compare_to_oracle,
    disturbance_settling,
    measured_settling_time,
    summarize,
)
from torque_track.controller import solve_settling_constant, tune_gains
from torque_track.dynamics import JointState
from torque_track.errors import InputError
from torque_track.simulator import ModelScaling, SimulationConfig, Trace, controller_for, simulate
from torque_track.trajectory import Hold, StepSequence

P = solve_settling_constant()


def synthetic_trace(eps, h, eps_dot=None):
    """Single-joint trace whose error is ``eps`` and whose reference is 0."""
    n = eps.size
    col = eps.reshape(-1, 1)
    eps_dot = (np.gradient(eps, h) if eps_dot is None else eps_dot).reshape(-1, 1)
    zeros = np.zeros((n, 1))
    return Trace(
        t=np.arange(n) * h, q=col.copy(), qdot=eps_dot, qddot=zeros.copy(), q_d=zeros.copy(),
        qd_d=zeros.copy(), qdd_d=zeros.copy(), eps=col.copy(), eps_dot=eps_dot.copy(),
        u=zeros.copy(), u_raw=zeros.copy(), energy=np.zeros(n), h=h, control_period=h,
        events={"switch_times": [], "pulses": []},
    )


class TestOscillator:
    def test_coefficients(self):
        osc = AnalyticOscillator(3.0, 2.0, -1.0)
        assert osc.c1 == 2.0 and osc.c2 == 5.0

    def test_initial_value(self):
        assert analytic_error(AnalyticOscillator(4.0, 0.7, 2.0), 0.0) == 0.7

    def test_reaches_threshold_at_unit_time(self):
        assert analytic_error(AnalyticOscillator(5.8339, 1.0), 1.0) == pytest.approx(0.02, abs=2e-5)

    def test_zero_initial_rate(self):
        osc = AnalyticOscillator(2.0, 1.0)
        d = 1e-6
        # One-sided at t=0 would bias the estimate; the closed form is even to first order.
        slope = (analytic_error(osc, d) - 1.0) / d
        assert abs(slope) <= 1e-5
        assert abs((analytic_error(osc, 2 * d) - analytic_error(osc, d)) / d) <= 1e-5

    def test_satisfies_ode(self):
        rng = np.random.default_rng(3)
        osc = AnalyticOscillator(3.5, 0.8, -0.4)
        d = 1e-4
        for t in rng.uniform(0.01, 3.0, 100):
            x = analytic_error(osc, t)
            xp, xm = analytic_error(osc, t + d), analytic_error(osc, t - d)
            residual = (xp - 2 * x + xm) / d**2 + 2 * osc.omega0 * (xp - xm) / (2 * d) + osc.omega0**2 * x
            assert abs(residual) <= 1e-5

    @given(st.floats(0.1, 50.0), st.floats(-10.0, 10.0))
    def test_no_overshoot(self, omega0, x0):
        t = np.linspace(0.0, 10.0 / omega0, 500)
        x = np.abs(analytic_error(AnalyticOscillator(omega0, x0), t))
        assert np.all(np.diff(x) <= 1e-15 * (1 + abs(x0)))

    def test_validation(self):
        with pytest.raises(InputError):
            AnalyticOscillator(0.0, 1.0)
        with pytest.raises(InputError):
            analytic_error(AnalyticOscillator(1.0, 1.0), -1.0)


class TestSettlingTime:
    @pytest.mark.parametrize("ts", [0.2, 0.5, 1.0, 2.0])
    def test_analytic_series(self, ts):
        h = 1e-4
        t = np.arange(0.0, 2 * ts, h)
        eps = analytic_error(AnalyticOscillator(P / ts, 1.0), t)
        assert abs(measured_settling_time(eps, h) - ts) <= h * (1 + 1e-9)

    def test_zero_series(self):
        assert measured_settling_time(np.zeros(10), 0.1) == 0.0

    def test_constant_series(self):
        assert measured_settling_time(np.full(10, 0.3), 0.1) == NOT_SETTLED

    def test_leaving_the_band_late(self):
        eps = np.array([1.0, 0.01, 0.01, 0.5, 0.01, 0.0])
        assert measured_settling_time(eps, 0.1) == pytest.approx(0.4)

    @given(st.floats(1e-6, 1e6), st.booleans())
    def test_scale_invariant(self, scale, flip):
        t = np.arange(0.0, 1.0, 1e-3)
        eps = analytic_error(AnalyticOscillator(8.0, 1.0, 2.0), t)
        s = -scale if flip else scale
        assert measured_settling_time(s * eps, 1e-3) == measured_settling_time(eps, 1e-3)

    def test_errors(self):
        with pytest.raises(InputError):
            measured_settling_time([], 0.1)
        with pytest.raises(InputError):
            measured_settling_time([1.0], 0.0)
        with pytest.raises(InputError):
            measured_settling_time([1.0], 0.1, threshold=1.5)


class TestOracleComparison:
    def test_self_comparison(self):
        h = 1e-3
        t = np.arange(0.0, 2.0, h)
        osc = AnalyticOscillator(P / 0.5, 0.4)
        trace = synthetic_trace(analytic_error(osc, t), h, eps_dot=np.zeros_like(t))
        assert compare_to_oracle(trace, tune_gains([0.5]), 0) == 0.0

    def test_exact_model_run(self, pend):
        # Slow gains keep the hold error (about omega0 * period / 2 relative) small.
        gains = tune_gains([2.0])
        sim = SimulationConfig(3.0, JointState([0.0]))
        trace = simulate(pend, controller_for(pend, gains), StepSequence((0.0,), ((0.0, (1.0,)),)), sim)
        assert compare_to_oracle(trace, gains, 0) <= 1e-3 * abs(trace.eps[0, 0])

    def test_mismatch_deviates_more(self, pend):
        gains = tune_gains([0.5])
        traj = StepSequence((0.0,), ((0.0, (1.0,)),))
        dev = []
        for scale in (None, (1.2,)):
            mismatch = None if scale is None else ModelScaling(scale)
            sim = SimulationConfig(1.5, JointState([0.0]), mismatch=mismatch)
            trace = simulate(pend, controller_for(pend, gains, mismatch), traj, sim)
            dev.append(compare_to_oracle(trace, gains, 0))
        assert dev[1] > dev[0]

    def test_bad_joint(self):
        trace = synthetic_trace(np.ones(5), 0.1)
        with pytest.raises(InputError):
            compare_to_oracle(trace, tune_gains([1.0]), 1)
        with pytest.raises(InputError):
            compare_to_oracle(trace, tune_gains([1.0, 1.0]), 0)


class TestSummary:
    def test_zero_hold(self, pend):
        gains = tune_gains([0.5])
        trace = simulate(pend, controller_for(pend, gains), Hold((0.0,)), SimulationConfig(0.5, JointState([0.0])))
        report = summarize(trace, gains)
        j = report.joints[0]
        assert j.rms_error == 0.0 and j.peak_torque == 0.0 and j.settling_time == 0.0
        assert report.settled and report.energy_drift == 0.0

    def test_saturation_duty(self, pend):
        gains = tune_gains([0.5])
        sim = SimulationConfig(1.0, JointState([0.0]), torque_limit=(1.0,))
        trace = simulate(pend, controller_for(pend, gains), StepSequence((0.0,), ((0.2, (math.pi,)),)), sim)
        report = summarize(trace, gains)
        assert report.joints[0].saturation_duty > 0.0
        assert not report.settled
        assert report.to_dict()["joints"][0]["settling_time"] == "not settled"

    def test_segments_follow_switches(self, pend):
        gains = tune_gains([0.3])
        traj = StepSequence((0.0,), ((0.1, (0.5,)), (0.7, (0.0,))))
        trace = simulate(pend, controller_for(pend, gains), traj, SimulationConfig(1.4, JointState([0.0])))
        j = summarize(trace, gains).joints[0]
        assert j.segment_settling[0] == 0.0
        assert [abs(x - 0.3) < 0.01 for x in j.segment_settling[1:]] == [True, True]
        assert j.settling_time == max(j.segment_settling)

    def test_disturbance_from_peak(self):
        h = 1e-3
        t = np.arange(0.0, 3.0, h)
        eps = np.where(t < 1.0, 0.0, analytic_error(AnalyticOscillator(P / 0.5, 0.0, 1.0), np.maximum(t - 1.0, 0.0)))
        trace = synthetic_trace(eps, h)
        peak_time, settle = disturbance_settling(trace, 0, 1.0)
        assert peak_time == pytest.approx(1.0 + 0.5 / P, abs=h)
        # From the peak (zero rate) the decay is the design case again.
        assert settle == pytest.approx(0.5, abs=1.5 * h)
