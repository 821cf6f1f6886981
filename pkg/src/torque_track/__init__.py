"""Computed-torque trajectory tracking for planar serial chains."""

from .analysis import (
    NOT_SETTLED,
    AnalyticOscillator,
    analytic_error,
    compare_to_oracle,
    measured_settling_time,
    summarize,
)
from .controller import ControllerConfig, GainSchedule, computed_torque, solve_settling_constant, tune_gains
from .dynamics import JointState, LinkParams, MechanismModel, forward_dynamics, inverse_dynamics
from .errors import InputError, NumericalError
from .simulator import PulseSpec, SimulationConfig, Trace, simulate
from .trajectory import Hold, Quintic, Sinusoid, StepSequence

__version__ = "0.1.0"

__all__ = [
    "NOT_SETTLED",
    "AnalyticOscillator",
    "ControllerConfig",
    "GainSchedule",
    "Hold",
    "InputError",
    "JointState",
    "LinkParams",
    "MechanismModel",
    "NumericalError",
    "PulseSpec",
    "Quintic",
    "SimulationConfig",
    "Sinusoid",
    "StepSequence",
    "Trace",
    "analytic_error",
    "compare_to_oracle",
    "computed_torque",
    "forward_dynamics",
    "inverse_dynamics",
    "measured_settling_time",
    "simulate",
    "solve_settling_constant",
    "summarize",
    "tune_gains",
]
