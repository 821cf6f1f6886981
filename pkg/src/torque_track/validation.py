"""Dynamics self-checks against the finite-difference oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, oracles
from .dynamics import JointState, MechanismModel
from .errors import NumericalError
from .simulator import simulate_passive

# Fixed so that every run checks the same states.
_SEED = 20240611

MASS_REL_TOL = 1e-6
SYMMETRY_REL_TOL = 1e-12
SKEW_TOL = 1e-6
GRAVITY_ABS_TOL = 1e-8
ROUNDTRIP_TOL = 1e-10
ENERGY_DRIFT_TOL = 1e-6
DISSIPATION_SLACK = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    skipped: bool = False
    note: str = ""

    def line(self) -> str:
        if self.skipped:
            return f"SKIP  {self.name}: {self.note}"
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: worst {self.worst:.3e} (tol {self.tolerance:.1e})"


def random_states(model: MechanismModel, count: int, rng: np.random.Generator):
    for _ in range(count):
        q = rng.uniform(-np.pi, np.pi, model.n)
        qdot = rng.uniform(-2.0, 2.0, model.n)
        yield q, qdot


def check_mass_matrix(model: MechanismModel, samples: int, rng) -> list[CheckResult]:
    worst_sym = worst_rel = 0.0
    spd = True
    for q, _ in random_states(model, samples, rng):
        M = dynamics.mass_matrix(model, q)
        worst_sym = max(worst_sym, np.max(np.abs(M - M.T)) / np.max(np.abs(M)))
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            spd = False
        H = oracles.mass_matrix_fd(model, q)
        worst_rel = max(worst_rel, np.max(np.abs(M - H)) / np.max(np.abs(H)))
    return [
        CheckResult("mass matrix symmetric", worst_sym <= SYMMETRY_REL_TOL, worst_sym, SYMMETRY_REL_TOL),
        CheckResult("mass matrix positive definite", spd, 0.0 if spd else 1.0, 0.0),
        CheckResult("mass matrix = kinetic-energy Hessian", worst_rel <= MASS_REL_TOL, worst_rel, MASS_REL_TOL),
    ]


def check_skew_symmetry(model: MechanismModel, samples: int, rng) -> CheckResult:
    worst = 0.0
    mass = lambda q: dynamics.mass_matrix(model, q)  # noqa: E731
    for q, qdot in random_states(model, samples, rng):
        x = rng.normal(size=model.n)
        Mdot = oracles.mass_matrix_rate_fd(mass, q, qdot)
        C = dynamics.coriolis_matrix(model, q, qdot)
        scale = (x @ x) * np.linalg.norm(qdot)
        worst = max(worst, abs(x @ (Mdot - 2.0 * C) @ x) / scale)
    return CheckResult("Mdot - 2C skew-symmetric", worst <= SKEW_TOL, worst, SKEW_TOL)


def check_gravity(model: MechanismModel, samples: int, rng) -> CheckResult:
    worst = 0.0
    for q, _ in random_states(model, samples, rng):
        worst = max(worst, np.max(np.abs(dynamics.gravity_vector(model, q) - oracles.gravity_fd(model, q))))
    return CheckResult("gravity = potential gradient", worst <= GRAVITY_ABS_TOL, worst, GRAVITY_ABS_TOL)


def check_roundtrip(model: MechanismModel, samples: int, rng) -> CheckResult:
    worst = 0.0
    for q, qdot in random_states(model, samples, rng):
        state = JointState(q, qdot)
        a = rng.normal(scale=5.0, size=model.n)
        u = dynamics.inverse_dynamics(model, state, a)
        worst = max(worst, np.max(np.abs(dynamics.forward_dynamics(model, state, u) - a)))
    return CheckResult("inverse/forward round trip", worst <= ROUNDTRIP_TOL, worst, ROUNDTRIP_TOL)


def check_energy(model: MechanismModel, t_end: float = 1.0, h: float = 1e-4) -> list[CheckResult]:
    """Conservation for frictionless models; monotone decay (and a skipped
    conservation check) otherwise."""
    start = JointState(np.linspace(1.0, 0.4, model.n), np.zeros(model.n))
    conserve = "energy conserved (passive, frictionless)"
    dissipate = "energy non-increasing (passive, damped)"
    try:
        run = simulate_passive(model, start, t_end, h)
    except NumericalError as exc:
        return [CheckResult(conserve if model.frictionless else dissipate, False, float("inf"), 0.0, note=str(exc))]
    if model.frictionless:
        drift = float(np.max(np.abs(run.energy - run.energy[0])))
        return [CheckResult(conserve, drift <= ENERGY_DRIFT_TOL, drift, ENERGY_DRIFT_TOL)]
    rise = float(max(0.0, np.max(np.diff(run.energy))))
    return [
        CheckResult(conserve, True, 0.0, ENERGY_DRIFT_TOL, skipped=True, note="model has joint damping"),
        CheckResult(dissipate, rise <= DISSIPATION_SLACK, rise, DISSIPATION_SLACK),
    ]


def validate_model(model: MechanismModel, samples: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(_SEED)
    results = check_mass_matrix(model, samples, rng)
    results.append(check_skew_symmetry(model, samples, rng))
    results.append(check_gravity(model, samples, rng))
    results.append(check_roundtrip(model, samples, rng))
    results.extend(check_energy(model))
    return results
