"""Finite-difference oracles for the dynamics terms.

Everything here is built from forward kinematics of the link centres of mass
and never calls the analytic mass matrix, gravity or Coriolis code, so the
comparisons in the validation suite and the tests check two independent
routes.
"""

from __future__ import annotations

import numpy as np

from .dynamics import MechanismModel


def com_positions(model: MechanismModel, q) -> np.ndarray:
    """(n, 2) array of link COM positions; q = 0 hangs straight down."""
    q = np.asarray(q, dtype=float)
    out = np.zeros((model.n, 2))
    joint = np.zeros(2)
    phi = 0.0
    for i, link in enumerate(model.links):
        phi += q[i]
        direction = np.array([np.sin(phi), -np.cos(phi)])
        out[i] = joint + link.com_distance * direction
        joint = joint + link.length * direction
    return out


def kinetic_energy(model: MechanismModel, q, qdot, delta: float = 1e-5) -> float:
    """Kinetic energy from COM velocities obtained by differencing positions
    along ``qdot``."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    vel = (com_positions(model, q + delta * qdot) - com_positions(model, q - delta * qdot)) / (2 * delta)
    omega = np.cumsum(qdot)
    total = 0.0
    for i, link in enumerate(model.links):
        total += 0.5 * link.mass * vel[i] @ vel[i] + 0.5 * link.inertia_com * omega[i] ** 2
    return total


def potential_energy(model: MechanismModel, q) -> float:
    heights = com_positions(model, q)[:, 1]
    masses = np.array([lk.mass for lk in model.links])
    return float(model.gravity * masses @ heights)


def mass_matrix_fd(model: MechanismModel, q, step: float = 0.1) -> np.ndarray:
    """Hessian of the kinetic energy in qdot, by central differences at qdot=0.

    The kinetic energy is quadratic in qdot, so the second difference adds no
    truncation error of its own; what remains comes from the position
    differencing inside :func:`kinetic_energy` (about 1e-9 relative).
    """
    n = model.n
    H = np.zeros((n, n))
    eye = np.eye(n) * step
    for a in range(n):
        for b in range(n):
            H[a, b] = (
                kinetic_energy(model, q, eye[a] + eye[b])
                - kinetic_energy(model, q, eye[a] - eye[b])
                - kinetic_energy(model, q, -eye[a] + eye[b])
                + kinetic_energy(model, q, -eye[a] - eye[b])
            ) / (4 * step * step)
    return H


def gravity_fd(model: MechanismModel, q, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of the potential energy."""
    q = np.asarray(q, dtype=float)
    g = np.zeros(model.n)
    for k in range(model.n):
        e = np.zeros(model.n)
        e[k] = step
        g[k] = (potential_energy(model, q + e) - potential_energy(model, q - e)) / (2 * step)
    return g


def mass_matrix_rate_fd(mass_matrix, q, qdot, step: float = 1e-6) -> np.ndarray:
    """``dM/dt`` along ``qdot`` by central differences of a mass-matrix function."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    return (mass_matrix(q + step * qdot) - mass_matrix(q - step * qdot)) / (2 * step)
