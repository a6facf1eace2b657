from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Kind(IntEnum):
    FLUID = 0
    WALL = 1
    PISTON = 2
    BODY = 3


@dataclass
class ParticleSystem:
    """Flat particle arrays. The last coordinate axis is vertical.

    ``body_id`` is -1 for every particle that is not part of a floating body.
    """

    pos: np.ndarray
    vel: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    mass: np.ndarray
    kind: np.ndarray
    body_id: np.ndarray
    dim: int = field(default=2)

    def __post_init__(self):
        n = self.pos.shape[0]
        if self.pos.shape != (n, self.dim) or self.vel.shape != (n, self.dim):
            raise ValueError("pos/vel must have shape (n, dim)")
        for name in ("rho", "p", "mass", "kind", "body_id"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        self.pos = np.ascontiguousarray(self.pos, dtype=np.float64)
        self.vel = np.ascontiguousarray(self.vel, dtype=np.float64)
        self.rho = np.ascontiguousarray(self.rho, dtype=np.float64)
        self.p = np.ascontiguousarray(self.p, dtype=np.float64)
        self.mass = np.ascontiguousarray(self.mass, dtype=np.float64)
        self.mass.flags.writeable = False
        self.kind = np.ascontiguousarray(self.kind, dtype=np.int8)
        self.body_id = np.ascontiguousarray(self.body_id, dtype=np.int32)

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    @property
    def fluid(self) -> np.ndarray:
        return self.kind == Kind.FLUID

    def indices(self, kind: Kind) -> np.ndarray:
        return np.flatnonzero(self.kind == kind)

    def body_indices(self, body_id: int) -> np.ndarray:
        idx = np.flatnonzero(self.body_id == body_id)
        if idx.size == 0:
            raise KeyError(f"unknown body_id {body_id}")
        return idx

    def total_mass(self) -> float:
        return float(self.mass.sum())

    def copy(self) -> "ParticleSystem":
        return ParticleSystem(
            self.pos.copy(), self.vel.copy(), self.rho.copy(), self.p.copy(),
            self.mass.copy(), self.kind.copy(), self.body_id.copy(), self.dim,
        )

    @classmethod
    def from_arrays(cls, pos, vel=None, rho=None, p=None, mass=None, kind=None,
                    body_id=None, rho0=1000.0, dp=None) -> "ParticleSystem":
        """Convenience constructor used by tests and geometry builders."""
        pos = np.atleast_2d(np.asarray(pos, dtype=np.float64))
        n, dim = pos.shape
        if vel is None:
            vel = np.zeros_like(pos)
        if rho is None:
            rho = np.full(n, rho0)
        if p is None:
            p = np.zeros(n)
        if mass is None:
            if dp is None:
                raise ValueError("mass or dp required")
            mass = np.full(n, rho0 * dp ** dim)
        if kind is None:
            kind = np.full(n, Kind.FLUID, dtype=np.int8)
        if body_id is None:
            body_id = np.full(n, -1, dtype=np.int32)
        return cls(pos, np.asarray(vel, float), np.asarray(rho, float), np.asarray(p, float),
                   np.asarray(mass, float), np.asarray(kind), np.asarray(body_id), dim)
