"""Floating point absorbers: force aggregation, rigid-body update and PTO power."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sph.particles import ParticleSystem

HEAVE_ONLY = "heave"
FREE = "free"


@dataclass
class RigidBodyState:
    """Kinematic state of one floating body.

    ``rel`` stores body-particle offsets from the centre of mass in the body
    frame; ``rot`` maps body frame to world frame (identity in heave mode).
    Particle SPH masses stay at ``rho0 dp^dim`` so the pressure sums see the
    right volumes; ``M`` is the inertial mass of the rigid body.
    """

    body_id: int
    M: float
    inertia: np.ndarray
    R0: np.ndarray
    V: np.ndarray
    Omega: np.ndarray
    z0: float
    particle_idx: np.ndarray
    rel: np.ndarray
    rot: np.ndarray
    kp: float = 0.0
    v_prev: float = 0.0
    a_z: float = 0.0
    dof: str = HEAVE_ONLY
    force_z: float = 0.0
    pto_z: float = 0.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("body mass must be positive")
        if self.kp < 0:
            raise ValueError("PTO damping must be non-negative")
        if self.dof not in (HEAVE_ONLY, FREE):
            raise ValueError(f"unknown dof mode {self.dof!r}")

    @property
    def dim(self) -> int:
        return self.R0.shape[0]

    @property
    def vz(self) -> float:
        return float(self.V[-1])

    @property
    def dz(self) -> float:
        return float(self.R0[-1] - self.z0)

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(
            self.body_id, self.M, self.inertia.copy(), self.R0.copy(), self.V.copy(),
            self.Omega.copy(), self.z0, self.particle_idx.copy(), self.rel.copy(),
            self.rot.copy(), self.kp, self.v_prev, self.a_z, self.dof, self.force_z,
            self.pto_z,
        )

    def particle_positions(self) -> np.ndarray:
        return self.R0[None, :] + self.rel @ self.rot.T

    def particle_velocities(self) -> np.ndarray:
        n = self.rel.shape[0]
        if self.dof == HEAVE_ONLY or not np.any(self.Omega):
            return np.broadcast_to(self.V, (n, self.dim)).copy()
        arm = self.rel @ self.rot.T
        if self.dim == 2:
            w = float(self.Omega[0])
            return self.V[None, :] + w * np.column_stack([-arm[:, 1], arm[:, 0]])
        return self.V[None, :] + np.cross(self.Omega[None, :], arm)

    def sync_particles(self, system: ParticleSystem) -> None:
        system.pos[self.particle_idx] = self.particle_positions()
        system.vel[self.particle_idx] = self.particle_velocities()


def pto_force(kp: float, v: float) -> float:
    """Linear damper: F = -kp v on the heave axis."""
    if kp < 0:
        raise ValueError("PTO damping must be non-negative")
    return -kp * v


def accumulate_body_forces(system: ParticleSystem, acc: np.ndarray, body: RigidBodyState):
    """Fluid force and torque about the centre of mass.

    ``acc`` holds the per-unit-mass fluid force on body particles as returned
    by the momentum kernel; gravity and PTO are not included.
    """
    idx = body.particle_idx
    if idx.size == 0 or np.any(system.body_id[idx] != body.body_id):
        raise KeyError(f"unknown body_id {body.body_id}")
    f = system.mass[idx, None] * acc[idx]
    F = f.sum(axis=0)
    arm = system.pos[idx] - body.R0[None, :]
    if body.dim == 2:
        torque = np.array([np.sum(arm[:, 0] * f[:, 1] - arm[:, 1] * f[:, 0])])
    else:
        torque = np.cross(arm, f).sum(axis=0)
    return F, torque


def _linear_acc(body: RigidBodyState, F_fluid, V, g: float):
    a = np.asarray(F_fluid, dtype=np.float64) / body.M
    a = a.copy()
    a[-1] += -g + pto_force(body.kp, float(V[-1])) / body.M
    if body.dof == HEAVE_ONLY:
        a[:-1] = 0.0
    return a


def _angular_acc(body: RigidBodyState, torque):
    if body.dof == HEAVE_ONLY:
        return np.zeros_like(body.Omega)
    inv = np.linalg.inv(body.inertia) if body.inertia.ndim == 2 else 1.0 / body.inertia
    return inv @ torque if body.inertia.ndim == 2 else inv * torque


def _rotate(rot, omega, dt, dim):
    if dim == 2:
        th = float(omega[0]) * dt
        c, s = np.cos(th), np.sin(th)
        return np.array([[c, -s], [s, c]]) @ rot
    w = np.asarray(omega) * dt
    ang = np.linalg.norm(w)
    if ang == 0:
        return rot
    k = w / ang
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    R = np.eye(3) + np.sin(ang) * K + (1 - np.cos(ang)) * (K @ K)
    return R @ rot


def body_predict(body: RigidBodyState, F_fluid, torque, dt: float, g: float) -> RigidBodyState:
    """Half-step predictor mirroring the fluid update."""
    out = body.copy()
    a = _linear_acc(body, F_fluid, body.V, g)
    out.V = body.V + 0.5 * dt * a
    out.R0 = body.R0 + 0.5 * dt * body.V
    alpha = _angular_acc(body, torque)
    out.Omega = body.Omega + 0.5 * dt * alpha
    out.rot = _rotate(body.rot, body.Omega, 0.5 * dt, body.dim)
    out.a_z = float(a[-1])
    out.force_z = float(F_fluid[-1])
    out.pto_z = pto_force(body.kp, body.vz)
    return out


def body_correct(body_n: RigidBodyState, body_half: RigidBodyState, F_fluid, torque,
                 dt: float, g: float) -> RigidBodyState:
    """Full-step corrector using forces evaluated at the half state."""
    out = body_n.copy()
    out.kp = body_half.kp
    a = _linear_acc(body_half, F_fluid, body_half.V, g)
    out.V = body_n.V + dt * a
    out.R0 = body_n.R0 + 0.5 * dt * (out.V + body_n.V)
    alpha = _angular_acc(body_half, torque)
    out.Omega = body_n.Omega + dt * alpha
    out.rot = _rotate(body_n.rot, 0.5 * (out.Omega + body_n.Omega), dt, body_n.dim)
    out.v_prev = body_n.vz
    out.a_z = float(a[-1])
    out.force_z = float(F_fluid[-1])
    out.pto_z = pto_force(body_half.kp, body_half.vz)
    if out.dof == HEAVE_ONLY:
        out.R0[:-1] = body_n.R0[:-1]
        out.V[:-1] = 0.0
        out.Omega[:] = 0.0
    return out


def advance_body(body: RigidBodyState, F_total, torque, dt: float, g: float = 9.81) -> RigidBodyState:
    """One symplectic step with the fluid force held fixed over the step."""
    half = body_predict(body, F_total, torque, dt, g)
    return body_correct(body, half, F_total, torque, dt, g)


def instantaneous_power(kp_n: float, v_n: float, v_prev: float) -> float:
    """P = kp ((v_n + v_prev) / 2)^2."""
    if kp_n < 0:
        raise ValueError("PTO damping must be non-negative")
    vm = 0.5 * (v_n + v_prev)
    return kp_n * vm * vm


@dataclass
class PowerSeries:
    """Per-step PTO records and the energy accumulated by trapezoidal rule."""

    t: list = field(default_factory=list)
    kp: list = field(default_factory=list)
    vz: list = field(default_factory=list)
    P: list = field(default_factory=list)
    E: float = 0.0

    def record(self, t: float, kp: float, vz: float, v_prev: float) -> float:
        p = instantaneous_power(kp, vz, v_prev)
        if self.t:
            self.E += 0.5 * (p + self.P[-1]) * (t - self.t[-1])
        self.t.append(t)
        self.kp.append(kp)
        self.vz.append(vz)
        self.P.append(p)
        return p

    def arrays(self):
        return np.asarray(self.t), np.asarray(self.P)


def average_power(series, t0: float, T_window: float) -> float:
    """Trapezoidal mean of P over [t0, t0 + T_window].

    ``series`` is a :class:`PowerSeries` or a ``(t, P)`` pair. End points are
    linearly interpolated when they fall between samples.
    """
    if isinstance(series, PowerSeries):
        t, P = series.arrays()
    else:
        t, P = (np.asarray(a, dtype=np.float64) for a in series)
    t1 = t0 + T_window
    tol = 1e-9 * max(1.0, abs(t1))
    if T_window <= 0 or t.size < 2 or t[0] > t0 + tol or t[-1] < t1 - tol:
        raise ValueError(f"power series does not cover [{t0}, {t1}]")
    inner = (t > t0) & (t < t1)
    tt = np.concatenate([[t0], t[inner], [t1]])
    pp = np.concatenate([[np.interp(t0, t, P)], P[inner], [np.interp(t1, t, P)]])
    return float(np.trapezoid(pp, tt) / T_window)
