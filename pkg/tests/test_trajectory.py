import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torque_track.errors import InputError
from torque_track.trajectory import Hold, Quintic, Sinusoid, StepSequence, TrajectorySample, evaluate


def triple(spec, t):
    s = evaluate(spec, t)
    return s.q_d.tolist(), s.qd_d.tolist(), s.qdd_d.tolist()


class TestHold:
    def test_constant(self):
        spec = Hold((0.3, -1.0))
        for t in (0.0, 1.0, 100.0):
            assert triple(spec, t) == ([0.3, -1.0], [0.0, 0.0], [0.0, 0.0])


class TestStepSequence:
    def test_upright_step(self):
        spec = StepSequence((0.0,), ((1.0, (math.pi,)),))
        assert triple(spec, 0.5) == ([0.0], [0.0], [0.0])
        assert triple(spec, 1.5) == ([math.pi], [0.0], [0.0])

    def test_switch_instant_takes_new_target(self):
        spec = StepSequence((0.0,), ((0.5, (1.0,)), (4.0, (0.0,))))
        assert triple(spec, 0.5)[0] == [1.0]
        assert triple(spec, 0.5 - 1e-12)[0] == [1.0]  # grid round-off
        assert triple(spec, 4.0)[0] == [0.0]
        assert spec.switch_times == (0.5, 4.0)

    def test_validation(self):
        with pytest.raises(InputError):
            StepSequence((0.0,), ((1.0, (1.0,)), (1.0, (2.0,))))
        with pytest.raises(InputError):
            StepSequence((0.0,), ((1.0, (1.0, 2.0)),))
        with pytest.raises(InputError):
            StepSequence((0.0,), ((-1.0, (1.0,)),))

    @given(st.floats(0.0, 10.0))
    def test_zero_derivatives(self, t):
        spec = StepSequence((0.0, 1.0), ((1.0, (2.0, 3.0)), (2.0, (0.0, 0.0))))
        _, qd, qdd = triple(spec, t)
        assert qd == [0.0, 0.0] and qdd == [0.0, 0.0]


class TestQuintic:
    spec = Quintic((0.0, 1.0), (math.pi, -1.0), 2.0)

    def test_boundaries(self):
        assert triple(self.spec, 0.0) == ([0.0, 1.0], [0.0, 0.0], [0.0, 0.0])
        q, qd, qdd = triple(self.spec, 2.0)
        assert q == pytest.approx([math.pi, -1.0], abs=1e-15)
        assert qd == pytest.approx([0.0, 0.0], abs=1e-12) and qdd == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_midpoint(self):
        assert triple(self.spec, 1.0)[0] == pytest.approx([math.pi / 2, 0.0], abs=1e-15)

    def test_clamps(self):
        assert triple(self.spec, 5.0) == ([math.pi, -1.0], [0.0, 0.0], [0.0, 0.0])
        late = Quintic((0.0,), (1.0,), 1.0, t0=2.0)
        assert triple(late, 1.0) == ([0.0], [0.0], [0.0])
        assert triple(late, 2.5)[0] == pytest.approx([0.5])

    def test_validation(self):
        with pytest.raises(InputError):
            Quintic((0.0,), (1.0,), 0.0)
        with pytest.raises(InputError):
            Quintic((0.0,), (1.0, 2.0), 1.0)


class TestSinusoid:
    def test_values(self):
        spec = Sinusoid((0.5,), (2.0,), (0.25,))
        q, qd, qdd = triple(spec, 1.0)
        w = 2 * math.pi * 0.25
        assert q[0] == pytest.approx(2.5)
        assert qd[0] == pytest.approx(2.0 * w * math.cos(w), abs=1e-15)
        assert qdd[0] == pytest.approx(-2.0 * w * w)

    def test_rejects_negative_frequency(self):
        with pytest.raises(InputError):
            Sinusoid((0.0,), (1.0,), (-1.0,))


@pytest.mark.parametrize(
    "spec",
    [Quintic((0.0, -0.5), (2.0, 1.5), 3.0), Sinusoid((0.1, 0.0), (1.0, 0.3), (0.5, 2.0))],
    ids=["quintic", "sinusoid"],
)
def test_derivative_consistency(spec):
    rng = np.random.default_rng(7)
    d = 1e-5
    for t in rng.uniform(0.05, 2.95, 100):
        q_m, qd_m, _ = triple(spec, t - d)
        q_p, qd_p, _ = triple(spec, t + d)
        _, qd, qdd = triple(spec, t)
        assert np.max(np.abs((np.array(q_p) - q_m) / (2 * d) - qd)) <= 1e-6
        assert np.max(np.abs((np.array(qd_p) - qd_m) / (2 * d) - qdd)) <= 1e-4


def test_negative_time_rejected():
    with pytest.raises(InputError):
        evaluate(Hold((0.0,)), -0.1)


def test_sample_type_checks():
    with pytest.raises(InputError):
        TrajectorySample(0.0, [0.0], [0.0, 1.0], [0.0])
    with pytest.raises(InputError):
        evaluate("hold", 0.0)


def test_deterministic():
    spec = Quintic((0.0,), (1.0,), 1.0)
    assert triple(spec, 0.37) == triple(spec, 0.37)
