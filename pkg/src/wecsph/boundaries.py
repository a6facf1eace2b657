"""Dummy-particle wall pressure, passive wave damping and free-surface gauges."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .sph.eos import EosSpec
from .sph.kernel import KernelSpec, wendland_w
from .sph.neighbors import NeighborList
from .sph.particles import Kind, ParticleSystem

FLUID = 0


@dataclass(frozen=True)
class DampingZoneSpec:
    x_start: float
    x_end: float
    ramp: float = 2.0
    beta_d: float = 10.0

    def __post_init__(self):
        if not self.x_start < self.x_end:
            raise ValueError("damping zone needs x_start < x_end")


def damping_factor(x, zone: DampingZoneSpec, dt: float):
    """Velocity multiplier in the zone; 1 outside, clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    s = np.clip((x - zone.x_start) / (zone.x_end - zone.x_start), 0.0, None)
    f = np.clip(1.0 - zone.beta_d * dt * s ** zone.ramp, 0.0, 1.0)
    inside = (x >= zone.x_start) & (x <= zone.x_end)
    return np.where(inside, f, 1.0)


def apply_damping_zone(system: ParticleSystem, zone: DampingZoneSpec, dt: float) -> None:
    """Relax fluid velocities towards zero inside the zone (in place)."""
    fluid = system.kind == Kind.FLUID
    f = damping_factor(system.pos[:, 0], zone, dt)
    f = np.where(fluid, f, 1.0)
    touched = f < 1.0
    if np.any(touched):
        system.vel[touched] *= f[touched, None]


@njit(cache=True)
def _boundary_pressure(pos, rho, p, kind, offsets, indices, h, alpha, acc_b, gvec,
                       rho0, bstiff, beta):
    n, dim = pos.shape
    inv_beta = 1.0 / beta
    bad = -1
    for i in range(n):
        if kind[i] == FLUID:
            continue
        sw = 0.0
        sp = 0.0
        gr = 0.0
        for s in range(offsets[i], offsets[i + 1]):
            j = indices[s]
            if kind[j] != FLUID:
                continue
            r2 = 0.0
            for k in range(dim):
                d = pos[i, k] - pos[j, k]
                r2 += d * d
            w = wendland_w(np.sqrt(r2), h, alpha)
            if w == 0.0:
                continue
            sw += w
            sp += p[j] * w
            proj = 0.0
            for k in range(dim):
                proj += (gvec[k] - acc_b[i, k]) * (pos[i, k] - pos[j, k])
            gr += rho[j] * proj * w
        if sw > 0.0:
            pi_ = (sp + gr) / sw
            base = 1.0 + pi_ / bstiff
            if base <= 0.0:
                bad = i
                base = 1e-12
            p[i] = pi_
            rho[i] = rho0 * base ** inv_beta
        else:
            p[i] = 0.0
            rho[i] = rho0
    return bad


def boundary_pressure_update(system: ParticleSystem, neighbors: NeighborList, gravity,
                             spec: KernelSpec, eos: EosSpec, boundary_acc=None) -> None:
    """Shepard-interpolated pressure (with hydrostatic and inertial correction)
    on every non-fluid particle, and the EOS-consistent density.

    ``boundary_acc`` holds per-particle accelerations of moving boundaries
    (piston, bodies); zero is assumed when omitted.
    """
    n, dim = system.pos.shape
    if boundary_acc is None:
        boundary_acc = np.zeros((n, dim))
    gvec = np.asarray(gravity, dtype=np.float64)
    bad = _boundary_pressure(system.pos, system.rho, system.p, system.kind,
                             neighbors.offsets, neighbors.indices, spec.h, spec.alpha,
                             boundary_acc, gvec, eos.rho0, eos.stiffness, eos.beta)
    if bad >= 0:
        raise FloatingPointError(f"boundary particle {bad} pressure below the EOS cavitation limit")


@dataclass(frozen=True)
class GaugeSpec:
    """Free-surface probe location. ``y`` is only used in 3-D."""

    x: float
    y: float = 0.0
    name: str = ""


def gauge_elevation(system: ParticleSystem, gauge: GaugeSpec, spec: KernelSpec,
                    still_level: float, resolution: float = 0.125) -> float:
    """Free-surface elevation above ``still_level`` at the gauge.

    A kernel-smoothed fluid volume fraction is sampled along the vertical line
    through the gauge; the surface is the highest level where it crosses 0.5.
    """
    dim = system.dim
    zc = dim - 1
    fluid = system.kind == Kind.FLUID
    pos = system.pos[fluid]
    vol = system.mass[fluid] / system.rho[fluid]
    dx = pos[:, 0] - gauge.x
    if dim == 3:
        dy = pos[:, 1] - gauge.y
        horiz = dx * dx + dy * dy
        strip = (np.abs(dx) <= spec.dp) & (np.abs(dy) <= spec.dp)
    else:
        horiz = dx * dx
        strip = np.abs(dx) <= spec.dp
    if not np.any(strip):
        raise ValueError(f"no fluid particles near gauge at x={gauge.x}")
    rad = spec.support_radius
    near = horiz < rad * rad
    zp = pos[near, zc]
    hp = horiz[near]
    vp = vol[near]
    top = zp.max() + rad
    bottom = zp.min()
    dz = resolution * spec.dp
    zs = np.arange(top, bottom - dz, -dz)
    r = np.sqrt(hp[None, :] + (zs[:, None] - zp[None, :]) ** 2)
    q = r / spec.h
    t = np.clip(1.0 - 0.5 * q, 0.0, None)
    w = spec.alpha * t ** 4 * (2.0 * q + 1.0)
    c = (w * vp[None, :]).sum(axis=1)
    above = np.flatnonzero(c >= 0.5)
    if above.size == 0:
        raise ValueError(f"gauge at x={gauge.x} never reaches a filled column")
    k = above[0]
    if k == 0:
        z = zs[0]
    else:
        # c[k-1] < 0.5 <= c[k]; zs decreases with index
        frac = (0.5 - c[k - 1]) / (c[k] - c[k - 1])
        z = zs[k - 1] + frac * (zs[k] - zs[k - 1])
    return float(z - still_level)
