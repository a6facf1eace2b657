"""Right-hand sides of the continuity and momentum equations.

Continuity (delta-SPH with a dynamic-density diffusion term)::

    Drho_i/Dt = -rho_i div(u)_i + zeta_i,   div(u)_i = -sum_j u_ij . gradW_ij V_j
    zeta_i    = delta h cf sum_j psi_ij . gradW_ij V_j            (fluid-fluid only)
    psi_ij    = 2 (rho_j^dyn - rho_i^dyn) r_ji / |r_ji|^2

where ``rho^dyn`` removes the hydrostatic density implied by depth below the
still-water level.

Momentum with a linearised Riemann interface pressure::

    Du_i/Dt = -2 sum_j m_j p* / (rho_i rho_j) gradW_ij + g
    p*      = (pL + pR)/2 + lam rho_bar cf (uL - uR) / 2
    lam     = min(eta (uL - uR)^+ / cf, 1)

The left/right normal velocities are ``uL = -u_i . e_ij``, ``uR = -u_j . e_ij``
with ``e_ij`` the unit vector pointing from j to i, so that approaching pairs
give ``uL - uR > 0``.

Body particles receive the per-unit-mass force from their fluid neighbours
only (no gravity); wall and piston particles get no rates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .eos import EosSpec
from .kernel import KernelSpec
from .neighbors import NeighborList
from .particles import Kind, ParticleSystem

FLUID = 0
WALL = 1
PISTON = 2
BODY = 3


@dataclass(frozen=True)
class RateParams:
    """Constants shared by the rate kernels."""

    delta_dd: float = 0.1
    eta_lim: float = 3.0
    z_surface: float = 0.0
    g: float = 9.81
    # >= 0 forces the Riemann limiter to this value (testing aid)
    lam_override: float = -1.0
    # kept for the two unimplemented terms of the full scheme; must stay off
    vem_hpdc: bool = False

    def __post_init__(self):
        if self.vem_hpdc:
            raise NotImplementedError(
                "velocity-divergence mitigation and divergence cleaning terms are not implemented"
            )


@njit(cache=True)
def riemann_pstar(pl, pr, rhol, rhor, ul, ur, cf, eta_lim):
    du = ul - ur
    lam = eta_lim * max(du, 0.0) / cf
    if lam > 1.0:
        lam = 1.0
    return 0.5 * (pl + pr) + 0.5 * lam * 0.5 * (rhol + rhor) * cf * du


def riemann_interface_pressure(pL, pR, rhoL, rhoR, uL, uR, cf, eta_lim=3.0) -> float:
    """Linearised acoustic Riemann interface pressure with a one-sided limiter."""
    if not (rhoL > 0 and rhoR > 0):
        raise ValueError("Riemann states need positive densities")
    return float(riemann_pstar(float(pL), float(pR), float(rhoL), float(rhoR),
                               float(uL), float(uR), float(cf), float(eta_lim)))


@njit(cache=True)
def _rates(pos, vel, rho, p, mass, kind, offsets, indices, h, alpha, cf, rho0,
           bstiff, beta, delta_dd, eta_lim, lam_override, z_surface, g, gvec,
           drho, acc):
    n, dim = pos.shape
    zc = dim - 1
    inv_beta = 1.0 / beta
    rho_h = np.empty(n)
    for i in range(n):
        if kind[i] == FLUID:
            base = 1.0 + rho0 * g * (z_surface - pos[i, zc]) / bstiff
            rho_h[i] = rho0 * base ** inv_beta if base > 0.0 else 0.0
        else:
            rho_h[i] = 0.0
    diff_coef = delta_dd * h * cf
    hh = h * h
    for i in range(n):
        ki = kind[i]
        drho[i] = 0.0
        for k in range(dim):
            acc[i, k] = 0.0
        if ki == WALL or ki == PISTON:
            continue
        rhoi = rho[i]
        pi_ = p[i]
        dcon = 0.0
        dz = 0.0
        ai0 = 0.0
        ai1 = 0.0
        ai2 = 0.0
        for s in range(offsets[i], offsets[i + 1]):
            j = indices[s]
            kj = kind[j]
            if ki == BODY and kj != FLUID:
                continue
            r2 = 0.0
            for k in range(dim):
                d = pos[i, k] - pos[j, k]
                r2 += d * d
            r = np.sqrt(r2)
            q = r / h
            if q >= 2.0 or r == 0.0:
                continue
            t = 1.0 - 0.5 * q
            fac = -5.0 * alpha * t * t * t / hh
            rhoj = rho[j]
            vj = mass[j] / rhoj
            # relative velocity projected on r_ij, and normal velocities
            uijr = 0.0
            uin = 0.0
            ujn = 0.0
            for k in range(dim):
                d = pos[i, k] - pos[j, k]
                uijr += (vel[i, k] - vel[j, k]) * d
                uin += vel[i, k] * d
                ujn += vel[j, k] * d
            if ki == FLUID:
                dcon += uijr * fac * vj
                if kj == FLUID:
                    dz += -2.0 * fac * ((rhoj - rho_h[j]) - (rhoi - rho_h[i])) * vj
            ul = -uin / r
            ur = -ujn / r
            du = ul - ur
            if lam_override >= 0.0:
                lam = lam_override
            else:
                lam = eta_lim * max(du, 0.0) / cf
                if lam > 1.0:
                    lam = 1.0
            pstar = 0.5 * (pi_ + p[j]) + 0.5 * lam * 0.5 * (rhoi + rhoj) * cf * du
            coef = -2.0 * mass[j] * pstar / (rhoi * rhoj) * fac
            ai0 += coef * (pos[i, 0] - pos[j, 0])
            ai1 += coef * (pos[i, 1] - pos[j, 1])
            if dim == 3:
                ai2 += coef * (pos[i, 2] - pos[j, 2])
        acc[i, 0] = ai0
        acc[i, 1] = ai1
        if dim == 3:
            acc[i, 2] = ai2
        if ki == FLUID:
            drho[i] = rhoi * dcon + diff_coef * dz
            for k in range(dim):
                acc[i, k] += gvec[k]
    for i in range(n):
        if not np.isfinite(drho[i]):
            return i
        for k in range(dim):
            if not np.isfinite(acc[i, k]):
                return i
    return -1


@njit(cache=True)
def _rates2d(pos, vel, rho, p, mass, kind, offsets, indices, h, alpha, cf, rho0,
             bstiff, beta, delta_dd, eta_lim, lam_override, z_surface, g, gvec, drho, acc):
    # Same arithmetic as _rates, unrolled for two dimensions (the hot path).
    n = pos.shape[0]
    inv_beta = 1.0 / beta
    rho_h = np.empty(n)
    for i in range(n):
        if kind[i] == FLUID:
            base = 1.0 + rho0 * g * (z_surface - pos[i, 1]) / bstiff
            rho_h[i] = rho0 * base ** inv_beta if base > 0.0 else 0.0
        else:
            rho_h[i] = 0.0
    diff_coef = delta_dd * h * cf
    inv_h = 1.0 / h
    c5 = -5.0 * alpha / (h * h)
    r2max = 4.0 * h * h
    for i in range(n):
        ki = kind[i]
        drho[i] = 0.0
        acc[i, 0] = 0.0
        acc[i, 1] = 0.0
        if ki == WALL or ki == PISTON:
            continue
        rhoi = rho[i]
        pi_ = p[i]
        xi = pos[i, 0]
        zi = pos[i, 1]
        ui = vel[i, 0]
        wi = vel[i, 1]
        rhi = rho_h[i]
        dcon = 0.0
        dz = 0.0
        ax = 0.0
        az = 0.0
        for s in range(offsets[i], offsets[i + 1]):
            j = indices[s]
            kj = kind[j]
            if ki == BODY and kj != FLUID:
                continue
            dx = xi - pos[j, 0]
            dzz = zi - pos[j, 1]
            r2 = dx * dx + dzz * dzz
            if r2 >= r2max or r2 == 0.0:
                continue
            r = np.sqrt(r2)
            t = 1.0 - 0.5 * r * inv_h
            fac = c5 * t * t * t
            rhoj = rho[j]
            vj = mass[j] / rhoj
            uj = vel[j, 0]
            wj = vel[j, 1]
            uin = ui * dx + wi * dzz
            ujn = uj * dx + wj * dzz
            if ki == FLUID:
                dcon += (uin - ujn) * fac * vj
                if kj == FLUID:
                    dz += -2.0 * fac * ((rhoj - rho_h[j]) - (rhoi - rhi)) * vj
            du = (ujn - uin) / r
            if lam_override >= 0.0:
                lam = lam_override
            else:
                lam = eta_lim * max(du, 0.0) / cf
                if lam > 1.0:
                    lam = 1.0
            pstar = 0.5 * (pi_ + p[j]) + 0.5 * lam * 0.5 * (rhoi + rhoj) * cf * du
            coef = -2.0 * mass[j] * pstar / (rhoi * rhoj) * fac
            ax += coef * dx
            az += coef * dzz
        acc[i, 0] = ax
        acc[i, 1] = az
        if ki == FLUID:
            drho[i] = rhoi * dcon + diff_coef * dz
            acc[i, 0] += gvec[0]
            acc[i, 1] += gvec[1]
    for i in range(n):
        if not (np.isfinite(drho[i]) and np.isfinite(acc[i, 0]) and np.isfinite(acc[i, 1])):
            return i
    return -1


def compute_rates(system: ParticleSystem, neighbors: NeighborList, spec: KernelSpec,
                  eos: EosSpec, gravity, params: RateParams = RateParams(),
                  out=None):
    """Density rate and acceleration for every particle in one pass.

    Returns ``(drho, acc)``. Raises :class:`FloatingPointError` naming the
    first particle with a non-finite rate.
    """
    n, dim = system.pos.shape
    gvec = np.zeros(dim) if gravity is None else np.asarray(gravity, dtype=np.float64)
    if out is None:
        drho = np.empty(n)
        acc = np.empty((n, dim))
    else:
        drho, acc = out
    kern = _rates2d if dim == 2 else _rates
    bad = kern(system.pos, system.vel, system.rho, system.p, system.mass, system.kind,
               neighbors.offsets, neighbors.indices, spec.h, spec.alpha, eos.cf,
                 eos.rho0, eos.stiffness, eos.beta, params.delta_dd, params.eta_lim,
                 params.lam_override, params.z_surface, params.g, gvec, drho, acc)
    if bad >= 0:
        raise FloatingPointError(f"non-finite rate at particle {bad} (kind {Kind(system.kind[bad]).name})")
    return drho, acc


def continuity_rate(system, neighbors, spec, eos, params: RateParams = RateParams()):
    """Per-particle Drho/Dt (zero for non-fluid particles)."""
    return compute_rates(system, neighbors, spec, eos, None, params)[0]


def momentum_rate(system, neighbors, spec, eos, gravity, params: RateParams = RateParams()):
    """Per-particle acceleration; body particles carry the fluid force per unit mass."""
    return compute_rates(system, neighbors, spec, eos, gravity, params)[1]
