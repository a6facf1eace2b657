"""Particle layouts for the numerical wave tank.

The bottom sits at z = 0 and still water at z = depth; the piston face rests
at x = 0 and the far wall at x = length. Fluid particles fill a lattice of
spacing dp with cell centres at (i + 1/2) dp. Walls and the piston carry
``n_layers`` rows of dummy particles. Floating bodies occupy the lattice
cells whose centres lie inside their geometry, so the fluid–body gap is dp
everywhere, as for fixed walls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .body import HEAVE_ONLY, RigidBodyState
from .boundaries import DampingZoneSpec, GaugeSpec
from .integrator import SimulationState, SolverSetup
from .sph.eos import EosSpec, hydrostatic_density
from .sph.kernel import KernelSpec
from .sph.particles import Kind, ParticleSystem
from .waves import WaveMakerSpec, solve_dispersion


@dataclass(frozen=True)
class BodySpec:
    """Vertical cylinder (3-D) or its rectangular 2-D section."""

    x: float
    diameter: float = 0.5
    height: float = 0.22
    draft: float = 0.112
    mass: float | None = None  # None: neutral buoyancy at ``draft``
    dof: str = HEAVE_ONLY
    kp: float = 0.0

    def __post_init__(self):
        if not (self.diameter > 0 and self.height > 0 and 0 < self.draft < self.height):
            raise ValueError("body needs positive size and 0 < draft < height")


@dataclass(frozen=True)
class TankSpec:
    length: float = 12.0
    depth: float = 1.1
    width: float = 1.0  # 3-D only
    dp: float = 0.02
    dim: int = 2
    freeboard: float = 0.2
    n_layers: int = 4
    cf: float | None = None  # None: 10 sqrt(g depth)
    rho0: float = 1000.0
    g: float = 9.81
    damping_length: float | None = None  # None: one wavelength (or no zone without waves)
    piston: bool = True
    bodies: tuple[BodySpec, ...] = field(default_factory=tuple)
    gauges_x: tuple[float, ...] = ()
    gauge_offsets: tuple[float, ...] = (-0.15, -0.05, 0.05, 0.15)

    def sound_speed(self) -> float:
        return self.cf if self.cf is not None else 10.0 * math.sqrt(self.g * self.depth)


@dataclass
class Tank:
    state: SimulationState
    setup: SolverSetup
    gauges: list[GaugeSpec]
    body_gauges: list[list[GaugeSpec]]
    spec: TankSpec


def _lattice(n_per_axis, origin, dp):
    axes = [origin[k] + (np.arange(n) + 0.5) * dp for k, n in enumerate(n_per_axis)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def _walls(spec: TankSpec, dp: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed walls (bottom, far end, side walls in 3-D) and piston particles."""
    L, nl = spec.length, spec.n_layers
    top = spec.depth + spec.freeboard
    nz = int(round(top / dp))
    x_left = -nl * dp - 0.25  # bottom continues under the piston travel
    nx_b = int(round((L + nl * dp - x_left) / dp))
    if spec.dim == 2:
        bottom = _lattice((nx_b, nl), (x_left, -nl * dp), dp)
        right = _lattice((nl, nz), (L, 0.0), dp)
        piston = _lattice((nl, nz), (-nl * dp, 0.0), dp)
        return np.vstack([bottom, right]), piston
    W = spec.width
    ny = int(round(W / dp))
    bottom = _lattice((nx_b, ny + 2 * nl, nl), (x_left, -nl * dp, -nl * dp), dp)
    right = _lattice((nl, ny + 2 * nl, nz), (L, -nl * dp, 0.0), dp)
    side0 = _lattice((nx_b, nl, nz), (x_left, -nl * dp, 0.0), dp)
    side1 = _lattice((nx_b, nl, nz), (x_left, W, 0.0), dp)
    piston = _lattice((nl, ny, nz), (-nl * dp, 0.0, 0.0), dp)
    return np.vstack([bottom, right, side0, side1]), piston


def _inside_body(pos, b: BodySpec, spec: TankSpec):
    z_bot = spec.depth - b.draft
    zc = pos[:, -1]
    vert = (zc > z_bot) & (zc < z_bot + b.height)
    r = 0.5 * b.diameter
    if spec.dim == 2:
        return vert & (np.abs(pos[:, 0] - b.x) < r)
    yc = 0.5 * spec.width
    return vert & ((pos[:, 0] - b.x) ** 2 + (pos[:, 1] - yc) ** 2 < r * r)


def _body_lattice(b: BodySpec, spec: TankSpec, dp: float):
    """Lattice cells (same lattice as the fluid) covering the body."""
    r = 0.5 * b.diameter
    z_bot = spec.depth - b.draft
    lo = [math.floor((b.x - r) / dp) * dp]
    counts = [int(math.ceil((b.x + r) / dp) - math.floor((b.x - r) / dp))]
    if spec.dim == 3:
        yc = 0.5 * spec.width
        lo.append(math.floor((yc - r) / dp) * dp)
        counts.append(int(math.ceil((yc + r) / dp) - math.floor((yc - r) / dp)))
    lo.append(math.floor(z_bot / dp) * dp)
    counts.append(int(math.ceil((z_bot + b.height) / dp) - math.floor(z_bot / dp)))
    cand = _lattice(counts, lo, dp)
    return cand[_inside_body(cand, b, spec)]


def _make_body(k: int, b: BodySpec, pts: np.ndarray, idx: np.ndarray, spec: TankSpec,
               rho0: float) -> RigidBodyState:
    dim = spec.dim
    if b.mass is not None:
        M = b.mass
    else:
        r = 0.5 * b.diameter
        area = b.diameter * b.draft if dim == 2 else math.pi * r * r * b.draft
        M = rho0 * area
    R0 = pts.mean(axis=0)
    rel = pts - R0
    mj = M / pts.shape[0]
    if dim == 2:
        inertia = np.array([mj * float(np.sum(rel ** 2))])
        omega = np.zeros(1)
    else:
        r2 = np.sum(rel ** 2, axis=1)
        inertia = mj * (np.eye(3) * r2.sum() - rel.T @ rel)
        omega = np.zeros(3)
    return RigidBodyState(body_id=k, M=M, inertia=inertia, R0=R0, V=np.zeros(dim),
                          Omega=omega, z0=float(R0[-1]), particle_idx=idx,
                          rel=rel, rot=np.eye(dim), kp=b.kp, dof=b.dof)


def build_tank(spec: TankSpec, wavemaker: WaveMakerSpec | None = None, seed: int = 0,
               skin: float = 0.0, fixed_dt: float | None = None, delta_dd: float = 0.1) -> Tank:
    """Assemble particles, bodies, gauges and solver settings for one tank."""
    dp = spec.dp
    dim = spec.dim
    kernel = KernelSpec(dp, dim)
    eos = EosSpec(rho0=spec.rho0, cf=spec.sound_speed())
    nx = int(round(spec.length / dp))
    nz = int(round(spec.depth / dp))
    if dim == 2:
        fluid = _lattice((nx, nz), (0.0, 0.0), dp)
    else:
        fluid = _lattice((nx, int(round(spec.width / dp)), nz), (0.0, 0.0, 0.0), dp)
    body_pts = []
    for b in spec.bodies:
        fluid = fluid[~_inside_body(fluid, b, spec)]
        body_pts.append(_body_lattice(b, spec, dp))
    walls, piston = _walls(spec, dp)
    if not spec.piston:
        walls = np.vstack([walls, piston])
        piston = np.zeros((0, dim))
    blocks = [(fluid, Kind.FLUID), (walls, Kind.WALL), (piston, Kind.PISTON)]
    blocks += [(p, Kind.BODY) for p in body_pts]
    pos = np.vstack([blk for blk, _ in blocks])
    kind = np.concatenate([np.full(len(blk), int(kd), dtype=np.int8) for blk, kd in blocks])
    body_id = np.full(len(pos), -1, dtype=np.int32)
    start = sum(len(blk) for blk, _ in blocks[:3])
    idx_ranges = []
    for k, pts in enumerate(body_pts):
        idx = np.arange(start, start + len(pts))
        body_id[idx] = k
        idx_ranges.append(idx)
        start += len(pts)

    n = len(pos)
    rho = np.full(n, spec.rho0)
    f = kind == Kind.FLUID
    rho[f] = hydrostatic_density(spec.depth - pos[f, -1], eos, spec.g)
    p = np.zeros(n)
    p[f] = eos.stiffness * ((rho[f] / eos.rho0) ** eos.beta - 1.0)
    mass = np.full(n, spec.rho0 * dp ** dim)
    system = ParticleSystem(pos, np.zeros_like(pos), rho, p, mass, kind, body_id, dim)
    bodies = [_make_body(k, b, pts, idx, spec, spec.rho0)
              for k, (b, pts, idx) in enumerate(zip(spec.bodies, body_pts, idx_ranges))]

    damping = None
    if wavemaker is not None or spec.damping_length is not None:
        dl = spec.damping_length
        if dl is None:
            T = wavemaker.T if wavemaker.T else 2.0 * math.pi / wavemaker.omega
            dl = 2.0 * math.pi / solve_dispersion(T, spec.depth, spec.g)
        damping = DampingZoneSpec(spec.length - dl, spec.length)
    setup = SolverSetup(kernel, eos, g=spec.g, still_level=spec.depth, delta_dd=delta_dd,
                        damping=damping, fixed_dt=fixed_dt, skin=skin)
    yc = 0.5 * spec.width if dim == 3 else 0.0
    gauges = [GaugeSpec(x, yc, f"g{i}") for i, x in enumerate(spec.gauges_x)]
    body_gauges = []
    for k, b in enumerate(spec.bodies):
        r = 0.5 * b.diameter
        gl = []
        for j, off in enumerate(spec.gauge_offsets):
            x = b.x - r + off if off < 0 else b.x + r + off
            gl.append(GaugeSpec(x, yc, f"pa{k}_g{j}"))
        body_gauges.append(gl)
    state = SimulationState(system, bodies, wavemaker, 0.0, 0, np.random.default_rng(seed))
    return Tank(state, setup, gauges, body_gauges, spec)
