"""Two-stage symplectic stepping, CFL control, snapshots and run orchestration.

One step of size dt::

    rates at n  ->  predictor to n+1/2  ->  rates at n+1/2  ->  corrector to n+1

    u^{n+1/2}  = u^n + dt/2 a^n           r^{n+1/2} = r^n + dt/2 u^n
    rho^{n+1/2} = rho^n + dt/2 chi^n
    u^{n+1}    = u^n + dt a^{n+1/2}       r^{n+1}   = r^n + dt/2 (u^{n+1} + u^n)
    rho^{n+1}  = rho^n (2 - eps) / (2 + eps),  eps = -(chi^{n+1/2} / rho^{n+1/2}) dt

Piston particles follow the prescribed paddle motion, body particles follow
their rigid body, and the damping zone acts after the corrector.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import binio
from .body import RigidBodyState, accumulate_body_forces, body_correct, body_predict
from .boundaries import DampingZoneSpec, apply_damping_zone, boundary_pressure_update
from .sph.eos import EosSpec
from .sph.kernel import KernelSpec
from .sph.neighbors import NeighborList, build_neighbors_arrays
from .sph.particles import Kind, ParticleSystem
from .sph.rates import RateParams, compute_rates
from .waves import WaveMakerSpec

SNAPSHOT_MAGIC = b"WECSNAP\0"
SNAPSHOT_VERSION = 1


def cfl_timestep(system: ParticleSystem, acc: np.ndarray, spec: KernelSpec, eos: EosSpec,
                 c_cfl: float = 0.2) -> float:
    """dt = C min_i(sqrt(h/|a_i|), h/cf) over fluid and body particles."""
    h = spec.h
    moving = (system.kind == Kind.FLUID) | (system.kind == Kind.BODY)
    amax = float(np.sqrt(np.max(np.sum(acc[moving] ** 2, axis=1)))) if np.any(moving) else 0.0
    if not math.isfinite(amax):
        raise FloatingPointError(f"non-finite acceleration in time-step control ({amax})")
    bound = h / eos.cf
    if amax > 0:
        bound = min(bound, math.sqrt(h / amax))
    dt = c_cfl * bound
    if not (dt > 0 and math.isfinite(dt)):
        raise FloatingPointError(f"invalid time step {dt}")
    return dt


@dataclass
class SimulationState:
    """Everything that evolves in time; the unit of snapshot/restore."""

    system: ParticleSystem
    bodies: list[RigidBodyState]
    wavemaker: WaveMakerSpec | None
    t: float = 0.0
    step: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))


@dataclass
class SolverSetup:
    """Static numerical configuration of a tank."""

    kernel: KernelSpec
    eos: EosSpec
    g: float = 9.81
    still_level: float = 0.0
    delta_dd: float = 0.1
    c_cfl: float = 0.2
    damping: DampingZoneSpec | None = None
    fixed_dt: float | None = None
    # Verlet skin (m); 0 rebuilds the neighbour list at every stage
    skin: float = 0.0

    @property
    def gravity(self) -> np.ndarray:
        gv = np.zeros(self.kernel.dim)
        gv[-1] = -self.g
        return gv

    @property
    def rate_params(self) -> RateParams:
        return RateParams(delta_dd=self.delta_dd, z_surface=self.still_level, g=self.g)


class _NeighborCache:
    """Superset neighbour lists rebuilt once particles drift by half the skin.

    Rate kernels discard pairs beyond the kernel support, so a superset list
    yields results identical to an exact rebuild.
    """

    def __init__(self, radius: float, skin: float):
        self.radius = radius
        self.skin = skin
        self.ref = None
        self.nl = None
        self.builds = 0

    def get(self, pos: np.ndarray) -> NeighborList:
        if self.nl is not None and self.skin > 0 and self.ref.shape == pos.shape:
            d2 = np.max(np.sum((pos - self.ref) ** 2, axis=1))
            if d2 < (0.5 * self.skin) ** 2:
                return self.nl
        off, idx = build_neighbors_arrays(pos, self.radius + self.skin)
        self.nl = NeighborList(off, idx, self.radius + self.skin)
        self.ref = pos.copy()
        self.builds += 1
        return self.nl

    def invalidate(self):
        self.nl = None
        self.ref = None


class Simulation:
    """Owns a :class:`SimulationState` and advances it in time."""

    def __init__(self, state: SimulationState, setup: SolverSetup):
        self.state = state
        self.setup = setup
        sys_ = state.system
        self.piston_idx = sys_.indices(Kind.PISTON)
        x0 = state.wavemaker.kinematics(state.t)[0] if state.wavemaker is not None else 0.0
        self.piston_rest = sys_.pos[self.piston_idx, 0] - x0
        self.fluid = sys_.kind == Kind.FLUID
        self.cache = _NeighborCache(setup.kernel.support_radius, setup.skin)
        n, dim = sys_.pos.shape
        self._drho = np.empty(n)
        self._acc = np.empty((n, dim))
        self.kp_schedule: Callable[[float, int], float] | None = None
        self.last_dt = 0.0
        self.last_forces = [np.zeros(dim) for _ in state.bodies]

    # -- kinematics of prescribed and rigid boundaries ---------------------

    def _place_piston(self, system: ParticleSystem, t: float):
        if self.state.wavemaker is None or self.piston_idx.size == 0:
            return 0.0
        x, v, a = self.state.wavemaker.kinematics(t)
        system.pos[self.piston_idx, 0] = self.piston_rest + x
        system.vel[self.piston_idx, 0] = v
        system.vel[self.piston_idx, 1:] = 0.0
        return a

    def _boundary_acc(self, a_piston: float, bodies) -> np.ndarray:
        n, dim = self.state.system.pos.shape
        ba = np.zeros((n, dim))
        if self.piston_idx.size:
            ba[self.piston_idx, 0] = a_piston
        for b in bodies:
            ba[b.particle_idx, -1] = b.a_z
        return ba

    def _evaluate(self, system: ParticleSystem, bodies, a_piston: float):
        s = self.setup
        nl = self.cache.get(system.pos)
        boundary_pressure_update(system, nl, s.gravity, s.kernel, s.eos,
                                 self._boundary_acc(a_piston, bodies))
        drho, acc = compute_rates(system, nl, s.kernel, s.eos, s.gravity, s.rate_params,
                                  out=(self._drho, self._acc))
        forces = [accumulate_body_forces(system, acc, b) for b in bodies]
        return drho, acc, forces

    def _update_pressure(self, system: ParticleSystem, where: str):
        f = self.fluid
        rho = system.rho[f]
        if not np.all(rho > 0):
            bad = int(np.flatnonzero(f)[np.flatnonzero(~(rho > 0))[0]])
            raise FloatingPointError(
                f"non-positive density {system.rho[bad]} at particle {bad} ({where}, t={self.state.t:.6f})")
        e = self.setup.eos
        system.p[f] = e.stiffness * ((rho / e.rho0) ** e.beta - 1.0)

    # -- stepping ----------------------------------------------------------

    def step(self, dt: float | None = None, max_dt: float | None = None) -> float:
        """Advance one symplectic step; returns the dt used.

        Without ``dt`` the step is the CFL bound (or the fixed regression
        step), optionally capped at ``max_dt``.
        """
        st = self.state
        s = self.setup
        sysn = st.system
        t = st.t
        if self.kp_schedule is not None:
            for k, b in enumerate(st.bodies):
                b.kp = float(self.kp_schedule(t, k))
        a_p = self._place_piston(sysn, t)
        drho, acc, forces = self._evaluate(sysn, st.bodies, a_p)
        bound = cfl_timestep(sysn, acc, s.kernel, s.eos, s.c_cfl)
        if dt is None:
            dt = s.fixed_dt if s.fixed_dt is not None else bound
            if max_dt is not None:
                dt = min(dt, max_dt)
        if dt > bound * (1 + 1e-12):
            raise ValueError(f"time step {dt} exceeds the CFL bound {bound} at t={t}")
        f = self.fluid
        half = dt * 0.5

        # predictor
        sysh = sysn.copy()
        sysh.vel[f] += half * acc[f]
        sysh.pos[f] += half * sysn.vel[f]
        sysh.rho[f] += half * drho[f]
        bodies_h = [body_predict(b, F, T, dt, s.g) for b, (F, T) in zip(st.bodies, forces)]
        for b in bodies_h:
            b.sync_particles(sysh)
        self._update_pressure(sysh, "predictor")
        a_ph = self._place_piston(sysh, t + half)
        drho_h, acc_h, forces_h = self._evaluate(sysh, bodies_h, a_ph)

        # corrector
        vel_n = sysn.vel[f].copy()
        sysn.vel[f] = vel_n + dt * acc_h[f]
        sysn.pos[f] += half * (sysn.vel[f] + vel_n)
        eps = -(drho_h[f] / sysh.rho[f]) * dt
        sysn.rho[f] = sysn.rho[f] * (2.0 - eps) / (2.0 + eps)
        new_bodies = [body_correct(b, bh, F, T, dt, s.g)
                      for b, bh, (F, T) in zip(st.bodies, bodies_h, forces_h)]
        for b in new_bodies:
            b.sync_particles(sysn)
        st.bodies = new_bodies
        self.last_forces = [F for F, _ in forces_h]
        self._update_pressure(sysn, "corrector")
        self._place_piston(sysn, t + dt)
        if s.damping is not None:
            apply_damping_zone(sysn, s.damping, dt)
        st.t = t + dt
        st.step += 1
        self.last_dt = dt
        return dt

    def run_until(self, t_end: float, callback: Callable[["Simulation"], None] | None = None,
                  max_steps: int | None = None) -> int:
        """Step until ``t >= t_end`` (the last step is shortened to land on it)."""
        n = 0
        while self.state.t < t_end - 1e-12:
            remaining = t_end - self.state.t
            if self.setup.fixed_dt is not None:
                dt = min(self.setup.fixed_dt, remaining)
                self.step(dt)
            else:
                self.step(max_dt=remaining)
            n += 1
            if callback is not None:
                callback(self)
            if max_steps is not None and n >= max_steps:
                break
        return n

    # -- snapshot / restore -------------------------------------------------

    def snapshot(self) -> bytes:
        return snapshot(self.state)

    def restore(self, blob: bytes) -> None:
        self.state = restore(blob, like=self.state)
        self.cache.invalidate()


def symplectic_step(sim: Simulation, dt: float | None = None) -> SimulationState:
    """Advance ``sim`` by one step and return its state."""
    sim.step(dt)
    return sim.state


_BODY_SCALARS = ("M", "z0", "kp", "v_prev", "a_z", "force_z", "pto_z")
_BODY_ARRAYS = ("inertia", "R0", "V", "Omega", "particle_idx", "rel", "rot")


def snapshot(state: SimulationState) -> bytes:
    """Byte-exact serialisation of ``state`` (wavemaker spec is static config)."""
    s = state.system
    arrays = {"pos": s.pos, "vel": s.vel, "rho": s.rho, "p": s.p, "mass": s.mass,
              "kind": s.kind, "body_id": s.body_id}
    bodies = []
    for k, b in enumerate(state.bodies):
        for name in _BODY_ARRAYS:
            arrays[f"body{k}.{name}"] = getattr(b, name)
        bodies.append({"body_id": b.body_id, "dof": b.dof,
                       **{name: float(getattr(b, name)).hex() for name in _BODY_SCALARS}})
    meta = {"t": float(state.t).hex(), "step": state.step, "dim": s.dim, "n": s.n,
            "bodies": bodies, "rng": binio.rng_state(state.rng)}
    return binio.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, arrays, meta)


def restore(blob: bytes, like: SimulationState | None = None) -> SimulationState:
    """Rebuild a state from :func:`snapshot` bytes.

    With ``like`` given, the particle count, dimension and body count must
    match it; the wavemaker spec is taken from ``like``.
    """
    arrays, meta = binio.unpack(blob, SNAPSHOT_MAGIC, SNAPSHOT_VERSION)
    if like is not None:
        if meta["n"] != like.system.n or meta["dim"] != like.system.dim:
            raise ValueError(f"snapshot holds {meta['n']} particles in {meta['dim']}-D, "
                             f"simulation has {like.system.n} in {like.system.dim}-D")
        if len(meta["bodies"]) != len(like.bodies):
            raise ValueError("snapshot body count does not match the simulation")
    system = ParticleSystem(arrays["pos"], arrays["vel"], arrays["rho"], arrays["p"],
                            arrays["mass"], arrays["kind"], arrays["body_id"], meta["dim"])
    bodies = []
    for k, bm in enumerate(meta["bodies"]):
        kw = {name: arrays[f"body{k}.{name}"].copy() for name in _BODY_ARRAYS}
        kw.update({name: float.fromhex(bm[name]) for name in _BODY_SCALARS})
        bodies.append(RigidBodyState(body_id=bm["body_id"], dof=bm["dof"], **kw))
    return SimulationState(system, bodies, like.wavemaker if like is not None else None,
                           float.fromhex(meta["t"]), meta["step"], binio.rng_from_state(meta["rng"]))


def mechanical_energy(system: ParticleSystem, g: float, z_ref: float = 0.0) -> float:
    """Kinetic plus gravitational potential energy of the fluid."""
    f = system.kind == Kind.FLUID
    m = system.mass[f]
    ke = 0.5 * float(np.sum(m * np.sum(system.vel[f] ** 2, axis=1)))
    pe = float(np.sum(m * g * (system.pos[f, -1] - z_ref)))
    return ke + pe


def write_particle_frame(path, system: ParticleSystem, header: str | None = None) -> None:
    """CSV dump: id, kind, x, z[, y], vx, vz, rho, p."""
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(header)
        w = csv.writer(fh)
        # tolist() yields Python floats, whose repr round-trips exactly
        pos, vel = system.pos.tolist(), system.vel.tolist()
        rho, p, kind = system.rho.tolist(), system.p.tolist(), system.kind.tolist()
        if system.dim == 2:
            w.writerow(["id", "kind", "x", "z", "vx", "vz", "rho", "p"])
            for i in range(system.n):
                w.writerow([i, int(kind[i]), *map(repr, (*pos[i], *vel[i], rho[i], p[i]))])
        else:
            w.writerow(["id", "kind", "x", "z", "y", "vx", "vz", "vy", "rho", "p"])
            for i in range(system.n):
                x, y, z = pos[i]
                vx, vy, vz = vel[i]
                w.writerow([i, int(kind[i]), *map(repr, (x, z, y, vx, vz, vy, rho[i], p[i]))])
