"""Tait-type weakly compressible equation of state."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class EosSpec:
    rho0: float = 1000.0
    cf: float = 40.0
    beta: float = 7.0

    def __post_init__(self):
        for name in ("rho0", "cf", "beta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"EosSpec.{name} must be positive, got {v}")

    @property
    def stiffness(self) -> float:
        """B = cf^2 rho0 / beta."""
        return self.cf * self.cf * self.rho0 / self.beta

    def check_mach(self, u_max: float) -> None:
        if self.cf < 10.0 * u_max:
            raise ValueError(
                f"speed of sound {self.cf} m/s is below 10x the expected max speed {u_max} m/s"
            )


@njit(cache=True)
def _pressure(rho, rho0, b, beta):
    return b * ((rho / rho0) ** beta - 1.0)


@njit(cache=True)
def _density(p, rho0, b, beta):
    return rho0 * (1.0 + p / b) ** (1.0 / beta)


def eos_pressure(rho, spec: EosSpec):
    """p = (cf^2 rho0 / beta) [(rho/rho0)^beta - 1]. Works on scalars and arrays."""
    arr = np.asarray(rho, dtype=np.float64)
    if np.any(~(arr > 0)):
        raise ValueError("density must be strictly positive")
    p = spec.stiffness * ((arr / spec.rho0) ** spec.beta - 1.0)
    return float(p) if p.ndim == 0 else p


def eos_density(p, spec: EosSpec):
    """Inverse of :func:`eos_pressure`."""
    arr = np.asarray(p, dtype=np.float64)
    base = 1.0 + arr / spec.stiffness
    if np.any(~(base > 0)):
        raise ValueError("pressure below the EOS cavitation limit")
    rho = spec.rho0 * base ** (1.0 / spec.beta)
    return float(rho) if rho.ndim == 0 else rho


def hydrostatic_density(depth, spec: EosSpec, g: float = 9.81):
    """EOS-consistent density at ``depth`` below the still-water level."""
    return eos_density(spec.rho0 * g * np.asarray(depth, dtype=np.float64), spec)
