import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torque_track import dynamics
from torque_track.controller import (
    SETTLING_FRACTION,
    ControllerConfig,
    GainSchedule,
    commanded_acceleration,
    computed_torque,
    pd_torque,
    settling_residual,
    solve_settling_constant,
    tune_gains,
)
from torque_track.dynamics import JointState
from torque_track.errors import InputError
from torque_track.trajectory import TrajectorySample

from conftest import G, random_state

P_LITERATURE = 5.8339


def sample(q_d, qd_d=None, qdd_d=None):
    n = len(q_d)
    return TrajectorySample(0.0, q_d, qd_d or [0.0] * n, qdd_d or [0.0] * n)


class TestSettlingConstant:
    def test_residual(self):
        p = solve_settling_constant()
        assert abs((1 + p) * math.exp(-p) - 0.02) <= 1e-12

    def test_literature_value(self):
        assert abs(solve_settling_constant() - P_LITERATURE) <= 1e-4

    def test_bracketed(self):
        p = solve_settling_constant()
        f = lambda x: (1 + x) * math.exp(-x)  # noqa: E731
        assert f(p - 0.1) > SETTLING_FRACTION > f(p + 0.1)

    def test_other_fraction(self):
        p = solve_settling_constant(0.05)
        assert abs(settling_residual(p, 0.05)) <= 1e-12
        assert p < solve_settling_constant()


class TestTuning:
    def test_unit_settling_time(self):
        g = tune_gains([1.0])
        assert g.omega0[0] == pytest.approx(P_LITERATURE, abs=1e-4)
        assert g.kp[0] == pytest.approx(34.034, abs=1e-3)
        assert g.kv[0] == pytest.approx(11.668, abs=1e-3)

    def test_two_seconds(self):
        assert tune_gains([2.0]).omega0[0] == pytest.approx(2.9170, abs=1e-4)

    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=4))
    def test_scaling_and_critical_damping(self, ts):
        ts = np.array(ts)
        g = tune_gains(ts)
        half = tune_gains(ts / 2)
        assert np.allclose(half.omega0, 2 * g.omega0, rtol=1e-15)
        assert np.allclose(g.kv**2, 4 * g.kp, rtol=1e-14)
        assert np.allclose(g.omega0 * g.ts, solve_settling_constant(), rtol=1e-15)

    @pytest.mark.parametrize("bad", [[-1.0], [0.0], [float("nan")], [], [1.0, float("inf")]])
    def test_rejects_bad_settling_times(self, bad):
        with pytest.raises(InputError):
            tune_gains(bad)

    def test_explicit_gains(self):
        g = GainSchedule.from_gains([16.0], [8.0])
        assert g.omega0.tolist() == [4.0]
        assert g.ts[0] == pytest.approx(solve_settling_constant() / 4.0)
        with pytest.raises(InputError):
            GainSchedule.from_gains([16.0], [5.0])
        with pytest.raises(InputError):
            GainSchedule.from_gains([16.0, 4.0], [8.0])

    def test_gains_read_only(self):
        g = tune_gains([1.0])
        with pytest.raises(ValueError):
            g.kp[0] = 1.0


class TestLaws:
    def test_on_trajectory(self):
        g = tune_gains([0.3, 0.7])
        v = commanded_acceleration(g, JointState([0.2, 0.1], [1.0, -1.0]), sample([0.2, 0.1], [1.0, -1.0], [3.0, 4.0]))
        assert v.tolist() == [3.0, 4.0]

    def test_scalar_example(self):
        g = GainSchedule.from_gains([34.034], [2 * math.sqrt(34.034)])
        v = commanded_acceleration(g, JointState([0.1]), sample([0.0]))
        assert v[0] == pytest.approx(-3.4034, abs=1e-12)
        assert pd_torque(g, JointState([0.1]), sample([0.0]))[0] == pytest.approx(-3.4034, abs=1e-12)

    def test_diagonal(self):
        g = tune_gains([0.5, 0.5])
        a = commanded_acceleration(g, JointState([0.3, 0.0]), sample([0.0, 0.0]))
        b = commanded_acceleration(g, JointState([0.3, 1.5], [0.0, -2.0]), sample([0.0, 0.0]))
        assert a[0] == b[0]

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            commanded_acceleration(tune_gains([1.0]), JointState([0.0, 0.0]), sample([0.0, 0.0]))

    def test_zero_pd(self):
        assert pd_torque(tune_gains([1.0]), JointState([0.4], [0.2]), sample([0.4], [0.2])).tolist() == [0.0]

    def test_equilibrium_and_gravity_compensation(self, pend):
        cfg = ControllerConfig(tune_gains([0.5]), pend)
        assert computed_torque(cfg, JointState([0.0]), sample([0.0])).tolist() == [0.0]
        held = computed_torque(cfg, JointState([math.pi / 2]), sample([math.pi / 2]))
        assert held[0] == pytest.approx(G, abs=1e-12)

    def test_exact_model_linearizes(self, chain, rng):
        cfg = ControllerConfig(tune_gains(np.linspace(0.3, 1.0, chain.n)), chain)
        for _ in range(20):
            q, qd = random_state(rng, chain.n)
            state = JointState(q, qd)
            desired = TrajectorySample(0.0, *(rng.normal(size=chain.n) for _ in range(3)))
            u = computed_torque(cfg, state, desired)
            v = commanded_acceleration(cfg.gains, state, desired)
            assert np.max(np.abs(dynamics.forward_dynamics(chain, state, u) - v)) <= 1e-10

    def test_config_dimension_check(self, arm2):
        with pytest.raises(InputError):
            ControllerConfig(tune_gains([1.0]), arm2)
