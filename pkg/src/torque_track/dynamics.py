"""Euler-Lagrange dynamics of planar serial chains with revolute joints.

Conventions
-----------
* Joint ``i`` rotates link ``i`` relative to link ``i-1``; the absolute link
  angle is ``phi_i = q_1 + ... + q_i``, measured from the downward vertical.
  ``q = 0`` is the hanging-down configuration.
* Gravity acts along ``-y`` of the base frame.
* The plant equation is ``M(q) qdd + C(q, qd) qd + G(q) = u + u_f`` with viscous
  friction ``u_f = -B qd``, ``B = diag(damping)``.
* Angles are never wrapped.

The numeric kernels work on plain Python floats. Chains are short (a handful
of links) and per-call numpy overhead would dominate the simulation loop; the
public functions accept and return numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, NumericalError

__all__ = [
    "LinkParams",
    "MechanismModel",
    "JointState",
    "DynamicsTerms",
    "mass_matrix",
    "mass_matrix_partials",
    "coriolis_matrix",
    "gravity_vector",
    "friction_force",
    "bias_forces",
    "dynamics_terms",
    "forward_dynamics",
    "inverse_dynamics",
    "kinetic_energy",
    "potential_energy",
    "total_energy",
]


@dataclass(frozen=True)
class LinkParams:
    """Physical parameters of one rigid planar link.

    Attributes:
        mass: link mass [kg], > 0.
        length: joint-to-joint length [m], > 0.
        com_distance: distance from the proximal joint to the centre of mass
            along the link [m], in ``[0, length]``.
        inertia_com: rotational inertia about the COM, out-of-plane axis [kg m^2].
        damping: viscous joint friction coefficient [N m s/rad].
    """

    mass: float
    length: float
    com_distance: float
    inertia_com: float = 0.0
    damping: float = 0.0

    def __post_init__(self):
        for name in ("mass", "length", "com_distance", "inertia_com", "damping"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InputError(f"link {name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise InputError(f"link {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.mass <= 0.0:
            raise InputError(f"link mass must be > 0, got {self.mass}")
        if self.length <= 0.0:
            raise InputError(f"link length must be > 0, got {self.length}")
        if not 0.0 <= self.com_distance <= self.length:
            raise InputError(
                f"link com_distance must lie in [0, length={self.length}], got {self.com_distance}"
            )
        if self.inertia_com < 0.0:
            raise InputError(f"link inertia_com must be >= 0, got {self.inertia_com}")
        if self.damping < 0.0:
            raise InputError(f"link damping must be >= 0, got {self.damping}")


@dataclass(frozen=True)
class MechanismModel:
    """An n-link planar serial chain, base link first."""

    links: tuple[LinkParams, ...]
    gravity: float = 9.81

    def __post_init__(self):
        links = tuple(self.links)
        if not links:
            raise InputError("a mechanism needs at least one link")
        for link in links:
            if not isinstance(link, LinkParams):
                raise InputError(f"expected LinkParams, got {type(link).__name__}")
        g = self.gravity
        if isinstance(g, bool) or not isinstance(g, (int, float)) or not math.isfinite(g):
            raise InputError(f"gravity must be a finite number, got {g!r}")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "gravity", float(g))
        # Flattened parameter tuples for the kernels.
        object.__setattr__(self, "_m", tuple(lk.mass for lk in links))
        object.__setattr__(self, "_l", tuple(lk.length for lk in links))
        object.__setattr__(self, "_lc", tuple(lk.com_distance for lk in links))
        object.__setattr__(self, "_inertia", tuple(lk.inertia_com for lk in links))
        object.__setattr__(self, "_b", tuple(lk.damping for lk in links))

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def masses(self) -> np.ndarray:
        return np.array(self._m)

    @property
    def dampings(self) -> np.ndarray:
        return np.array(self._b)

    @property
    def frictionless(self) -> bool:
        return not any(self._b)

    def with_mass_scale(self, scale: Sequence[float]) -> "MechanismModel":
        """Copy of the model with each link mass multiplied by ``scale[i]``."""
        scale = [float(s) for s in scale]
        if len(scale) != self.n:
            raise InputError(f"mass_scale needs {self.n} entries, got {len(scale)}")
        if any(not (s > 0.0 and math.isfinite(s)) for s in scale):
            raise InputError(f"mass_scale factors must be finite and > 0, got {scale}")
        links = tuple(
            LinkParams(lk.mass * s, lk.length, lk.com_distance, lk.inertia_com, lk.damping)
            for lk, s in zip(self.links, scale)
        )
        return MechanismModel(links, self.gravity)


class JointState:
    """Joint angles ``q`` [rad] and velocities ``qdot`` [rad/s]."""

    __slots__ = ("q", "qdot")

    def __init__(self, q, qdot=None):
        q = np.array(q, dtype=float).reshape(-1)
        qdot = np.zeros_like(q) if qdot is None else np.array(qdot, dtype=float).reshape(-1)
        if q.size == 0:
            raise InputError("joint state must have at least one coordinate")
        if q.shape != qdot.shape:
            raise InputError(f"q has {q.size} entries but qdot has {qdot.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))):
            raise InputError("joint state contains non-finite values")
        q.flags.writeable = False
        qdot.flags.writeable = False
        self.q = q
        self.qdot = qdot

    @property
    def n(self) -> int:
        return self.q.size

    def __repr__(self):
        return f"JointState(q={self.q.tolist()}, qdot={self.qdot.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, JointState):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.qdot, other.qdot)

    __hash__ = None


@dataclass(frozen=True)
class DynamicsTerms:
    M: np.ndarray
    C: np.ndarray
    G: np.ndarray
    u_f: np.ndarray


# ---------------------------------------------------------------------------
# input checking


def _vector(x, n: int, name: str) -> list[float]:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != n:
        raise InputError(f"{name} must have length {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr.tolist()


def _state(model: MechanismModel, state: JointState) -> tuple[list[float], list[float]]:
    if not isinstance(state, JointState):
        raise InputError(f"expected JointState, got {type(state).__name__}")
    if state.n != model.n:
        raise InputError(f"state has {state.n} joints, model has {model.n}")
    return state.q.tolist(), state.qdot.tolist()


# ---------------------------------------------------------------------------
# kernels (plain floats)


def _jacobians(model: MechanismModel, q: Sequence[float]):
    """COM translational Jacobians of every link.

    ``jx[i][k]`` / ``jy[i][k]`` are d(x_i)/dq_k and d(y_i)/dq_k for the centre
    of mass of link i; zero for k > i. Also returns the sines and cosines of the
    absolute link angles.
    """
    n = len(q)
    l, lc = model._l, model._lc
    s = [0.0] * n
    c = [0.0] * n
    # prefix sums over proximal links: pc[i] = sum_{j<i} l_j cos(phi_j)
    pc = [0.0] * (n + 1)
    ps = [0.0] * (n + 1)
    phi = 0.0
    for i in range(n):
        phi += q[i]
        si = math.sin(phi)
        ci = math.cos(phi)
        s[i] = si
        c[i] = ci
        pc[i + 1] = pc[i] + l[i] * ci
        ps[i + 1] = ps[i] + l[i] * si
    jx = []
    jy = []
    for i in range(n):
        tip_x = pc[i] + lc[i] * c[i]
        tip_y = ps[i] + lc[i] * s[i]
        jx.append([tip_x - pc[k] for k in range(i + 1)] + [0.0] * (n - i - 1))
        jy.append([tip_y - ps[k] for k in range(i + 1)] + [0.0] * (n - i - 1))
    return jx, jy, s, c


def _mass(model: MechanismModel, jx, jy) -> list[list[float]]:
    n = len(jx)
    m, inertia = model._m, model._inertia
    M = [[0.0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            acc = 0.0
            for i in range(b, n):
                ri, yi = jx[i], jy[i]
                acc += m[i] * (ri[a] * ri[b] + yi[a] * yi[b]) + inertia[i]
            M[a][b] = acc
            M[b][a] = acc
    return M


def _gravity(model: MechanismModel, jy) -> list[float]:
    n = len(jy)
    m, g = model._m, model.gravity
    out = [0.0] * n
    for k in range(n):
        acc = 0.0
        for i in range(k, n):
            acc += m[i] * jy[i][k]
        out[k] = g * acc
    return out


def _velocity_product(model: MechanismModel, qdot, jx, jy, s, c) -> list[float]:
    """``C(q, qd) qd`` via COM velocity-product accelerations.

    With ``qdd = 0`` the COM of link i accelerates by ``a_i = dJ_i/dt qd``,
    which for a planar chain is purely centripetal; then ``C qd = sum_i m_i
    J_i^T a_i``. The rotational Jacobians are constant, so they contribute
    nothing.
    """
    n = len(qdot)
    m, l, lc = model._m, model._l, model._lc
    ax = [0.0] * n
    ay = [0.0] * n
    qs = 0.0  # sum_{j<i} l_j w_j^2 sin(phi_j)
    qc = 0.0
    w = 0.0
    for i in range(n):
        w += qdot[i]
        w2 = w * w
        ax[i] = -(qs + lc[i] * w2 * s[i])
        ay[i] = qc + lc[i] * w2 * c[i]
        qs += l[i] * w2 * s[i]
        qc += l[i] * w2 * c[i]
    out = [0.0] * n
    for k in range(n):
        acc = 0.0
        for i in range(k, n):
            acc += m[i] * (jx[i][k] * ax[i] + jy[i][k] * ay[i])
        out[k] = acc
    return out


def _terms(model: MechanismModel, q, qdot):
    """Mass matrix, bias torque ``C qd + G - u_f`` and link-angle trig values."""
    jx, jy, s, c = _jacobians(model, q)
    M = _mass(model, jx, jy)
    cq = _velocity_product(model, qdot, jx, jy, s, c)
    G = _gravity(model, jy)
    b = model._b
    bias = [cq[k] + G[k] + b[k] * qdot[k] for k in range(len(q))]
    return M, bias, s, c


def _cholesky(M) -> list[list[float]]:
    n = len(M)
    L = [[0.0] * n for _ in range(n)]
    for j in range(n):
        Lj = L[j]
        d = M[j][j]
        for k in range(j):
            d -= Lj[k] * Lj[k]
        if not d > 0.0 or not math.isfinite(d):
            raise NumericalError(f"mass matrix is not positive definite (pivot {j}: {d!r})")
        ljj = math.sqrt(d)
        Lj[j] = ljj
        for i in range(j + 1, n):
            Li = L[i]
            acc = M[i][j]
            for k in range(j):
                acc -= Li[k] * Lj[k]
            Li[j] = acc / ljj
    return L


def _cho_solve(L, rhs) -> list[float]:
    n = len(rhs)
    y = [0.0] * n
    for i in range(n):
        acc = rhs[i]
        Li = L[i]
        for k in range(i):
            acc -= Li[k] * y[k]
        y[i] = acc / Li[i]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k][i] * x[k]
        x[i] = acc / L[i][i]
    return x


def _solve(M, bias, tau) -> list[float]:
    if len(M) == 1:
        m00 = M[0][0]
        if not m00 > 0.0 or not math.isfinite(m00):
            raise NumericalError(f"mass matrix is not positive definite ({m00!r})")
        return [(tau[0] - bias[0]) / m00]
    return _cho_solve(_cholesky(M), [t - b for t, b in zip(tau, bias)])


def _forward(model: MechanismModel, q, qdot, tau) -> list[float]:
    """qdd for applied joint torque ``tau`` (floats in, floats out)."""
    M, bias, _, _ = _terms(model, q, qdot)
    return _solve(M, bias, tau)


def _inverse(model: MechanismModel, q, qdot, v) -> list[float]:
    M, bias, _, _ = _terms(model, q, qdot)
    n = len(q)
    out = [0.0] * n
    for k in range(n):
        Mk = M[k]
        acc = bias[k]
        for j in range(n):
            acc += Mk[j] * v[j]
        out[k] = acc
    return out


def _kinetic(M, qdot) -> float:
    n = len(qdot)
    total = 0.0
    for a in range(n):
        Ma = M[a]
        row = 0.0
        for b in range(n):
            row += Ma[b] * qdot[b]
        total += qdot[a] * row
    return 0.5 * total


def _energy(model: MechanismModel, q, qdot) -> float:
    jx, jy, s, c = _jacobians(model, q)
    return _kinetic(_mass(model, jx, jy), qdot) + _potential(model, s, c)


def _potential(model: MechanismModel, s, c) -> float:
    # Zero when every link hangs straight down.
    m, l, lc, g = model._m, model._l, model._lc, model.gravity
    total = 0.0
    height = 0.0  # height of link i's proximal joint above its hanging-down position
    for i in range(len(s)):
        total += m[i] * g * (height + lc[i] * (1.0 - c[i]))
        height += l[i] * (1.0 - c[i])
    return total


# ---------------------------------------------------------------------------
# public operations


def mass_matrix(model: MechanismModel, q) -> np.ndarray:
    """Joint-space mass matrix ``M(q)`` (symmetric positive definite)."""
    qv = _vector(q, model.n, "q")
    jx, jy, _, _ = _jacobians(model, qv)
    return np.array(_mass(model, jx, jy))


def mass_matrix_partials(model: MechanismModel, q) -> np.ndarray:
    """Analytic partial derivatives of the mass matrix.

    Returns an ``(n, n, n)`` array ``D`` with ``D[k] = dM/dq_k``.
    Uses ``d(jx[i][l])/dq_k = -jy[i][max(k, l)]`` and
    ``d(jy[i][l])/dq_k = jx[i][max(k, l)]``.
    """
    qv = _vector(q, model.n, "q")
    jx, jy, _, _ = _jacobians(model, qv)
    jx, jy = np.array(jx), np.array(jy)
    n = model.n
    idx = np.maximum.outer(np.arange(n), np.arange(n))
    djx = -jy[:, idx]  # [i, k, l]
    djy = jx[:, idx]
    m = model.masses
    half = np.einsum("i,ika,ib->kab", m, djx, jx) + np.einsum("i,ika,ib->kab", m, djy, jy)
    return half + half.transpose(0, 2, 1)


def coriolis_matrix(model: MechanismModel, q, qdot) -> np.ndarray:
    """Coriolis matrix from Christoffel symbols of the first kind.

    ``C_ij = sum_k 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qd_k``, which
    makes ``Mdot - 2C`` skew-symmetric.
    """
    qd = np.asarray(_vector(qdot, model.n, "qdot"))
    D = mass_matrix_partials(model, q)
    # D[k, i, j] = dM_ij / dq_k
    term1 = np.einsum("kij,k->ij", D, qd)
    term2 = np.einsum("jik,k->ij", D, qd)
    term3 = np.einsum("ijk,k->ij", D, qd)
    return 0.5 * (term1 + term2 - term3)


def gravity_vector(model: MechanismModel, q) -> np.ndarray:
    """Gradient of the gravitational potential energy, ``G(q)``."""
    qv = _vector(q, model.n, "q")
    _, jy, _, _ = _jacobians(model, qv)
    return np.array(_gravity(model, jy))


def friction_force(model: MechanismModel, qdot) -> np.ndarray:
    """Viscous friction ``u_f = -B qd``; never injects power."""
    qd = _vector(qdot, model.n, "qdot")
    return np.array([-b * w for b, w in zip(model._b, qd)])


def bias_forces(model: MechanismModel, state: JointState) -> np.ndarray:
    """``C(q, qd) qd + G(q) - u_f``: the torque needed for zero acceleration."""
    q, qd = _state(model, state)
    return np.array(_inverse(model, q, qd, [0.0] * model.n))


def dynamics_terms(model: MechanismModel, state: JointState) -> DynamicsTerms:
    return DynamicsTerms(
        M=mass_matrix(model, state.q),
        C=coriolis_matrix(model, state.q, state.qdot),
        G=gravity_vector(model, state.q),
        u_f=friction_force(model, state.qdot),
    )


def forward_dynamics(model: MechanismModel, state: JointState, u) -> np.ndarray:
    """Joint accelerations produced by torque ``u``.

    Solves ``M qdd = u + u_f - C qd - G`` with a Cholesky factorization.

    Raises:
        InputError: wrong dimensions or non-finite torque.
        NumericalError: the mass matrix failed to factorize.
    """
    q, qd = _state(model, state)
    tau = _vector(u, model.n, "u")
    return np.array(_forward(model, q, qd, tau))


def inverse_dynamics(model: MechanismModel, state: JointState, v) -> np.ndarray:
    """Torque ``u = M v + C qd + G - u_f`` that makes ``qdd = v``."""
    q, qd = _state(model, state)
    acc = _vector(v, model.n, "v")
    return np.array(_inverse(model, q, qd, acc))


def kinetic_energy(model: MechanismModel, state: JointState) -> float:
    M = mass_matrix(model, state.q)
    return 0.5 * float(state.qdot @ M @ state.qdot)


def potential_energy(model: MechanismModel, q) -> float:
    """Gravitational potential, zero in the all-hanging-down configuration."""
    qv = _vector(q, model.n, "q")
    phi = np.cumsum(qv)
    return _potential(model, np.sin(phi).tolist(), np.cos(phi).tolist())


def total_energy(model: MechanismModel, state: JointState) -> float:
    """``T + V`` with ``T = 1/2 qd^T M qd``."""
    q, qd = _state(model, state)
    return _energy(model, q, qd)
