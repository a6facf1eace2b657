"""Wendland C2 smoothing kernel.

    W(q) = alpha_d * (1 - q/2)**4 * (2q + 1),   0 <= q = r/h <= 2

with alpha_d = 7 / (4 pi h^2) in 2-D and 21 / (16 pi h^3) in 3-D. The gradient
collapses to ``-5 alpha_d (1 - q/2)**3 r / h**2`` which is regular at r = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class KernelSpec:
    """Smoothing-length bookkeeping. ``h`` is always ``2 * dp``."""

    dp: float
    dim: int = 2

    def __post_init__(self):
        if not (self.dp > 0 and math.isfinite(self.dp)):
            raise ValueError(f"dp must be positive and finite, got {self.dp}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    @property
    def h(self) -> float:
        return 2.0 * self.dp

    @property
    def support_radius(self) -> float:
        return 2.0 * self.h

    @property
    def alpha(self) -> float:
        return normalisation(self.h, self.dim)


def normalisation(h: float, dim: int) -> float:
    if dim == 2:
        return 7.0 / (4.0 * math.pi * h * h)
    return 21.0 / (16.0 * math.pi * h * h * h)


@njit(cache=True)
def wendland_w(r, h, alpha):
    q = r / h
    if q >= 2.0:
        return 0.0
    t = 1.0 - 0.5 * q
    return alpha * t * t * t * t * (2.0 * q + 1.0)


@njit(cache=True)
def wendland_fac(r, h, alpha):
    """Scalar F such that grad_i W_ij = F * r_ij."""
    q = r / h
    if q >= 2.0:
        return 0.0
    t = 1.0 - 0.5 * q
    return -5.0 * alpha * t * t * t / (h * h)


def kernel_eval(r_ij, spec: KernelSpec):
    """Kernel value and gradient for one displacement ``r_ij = r_i - r_j``.

    Returns
    -------
    (float, ndarray)
        W and grad_i W, both exactly zero at and beyond ``|r_ij| = 2h``.
    """
    r_ij = np.asarray(r_ij, dtype=np.float64)
    if r_ij.shape != (spec.dim,):
        raise ValueError(f"displacement must have shape ({spec.dim},), got {r_ij.shape}")
    if not np.all(np.isfinite(r_ij)):
        raise ValueError("non-finite displacement passed to kernel_eval")
    r = float(np.sqrt(np.dot(r_ij, r_ij)))
    w = wendland_w(r, spec.h, spec.alpha)
    grad = wendland_fac(r, spec.h, spec.alpha) * r_ij
    return w, grad
