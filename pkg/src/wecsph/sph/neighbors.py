"""Uniform-grid cell list producing exact, index-sorted neighbour lists.

Lists are stored in CSR form: the neighbours of particle ``i`` are
``indices[offsets[i]:offsets[i + 1]]``, ascending. Every rate kernel gathers
over these lists in order, so reductions are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .kernel import KernelSpec
from .particles import ParticleSystem


@dataclass
class NeighborList:
    offsets: np.ndarray
    indices: np.ndarray
    cell_size: float

    def __len__(self) -> int:
        return self.offsets.shape[0] - 1

    def of(self, i: int) -> np.ndarray:
        return self.indices[self.offsets[i]:self.offsets[i + 1]]

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)


@njit(cache=True)
def _cell_coords(pos, lo, cs, ncell):
    n, dim = pos.shape
    cc = np.empty((n, dim), dtype=np.int64)
    lin = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = 0
        for k in range(dim):
            c = int((pos[i, k] - lo[k]) / cs)
            if c >= ncell[k]:
                c = ncell[k] - 1
            cc[i, k] = c
            key = key * ncell[k] + c
        lin[i] = key
    return cc, lin


@njit(cache=True)
def _build(pos, radius, cap):
    n, dim = pos.shape
    lo = np.empty(dim)
    hi = np.empty(dim)
    for k in range(dim):
        lo[k] = pos[:, k].min()
        hi[k] = pos[:, k].max()
    ncell = np.empty(dim, dtype=np.int64)
    total = 1
    for k in range(dim):
        ncell[k] = max(1, int((hi[k] - lo[k]) / radius) + 1)
        total *= ncell[k]
    cc, lin = _cell_coords(pos, lo, radius, ncell)
    order = np.argsort(lin, kind="mergesort")
    start = np.full(total, -1, dtype=np.int64)
    end = np.zeros(total, dtype=np.int64)
    for s in range(n):
        key = lin[order[s]]
        if start[key] < 0:
            start[key] = s
        end[key] = s + 1

    r2max = radius * radius
    offsets = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(cap, dtype=np.int64)
    nnz = 0
    noff = 1
    for k in range(dim):
        noff *= 3
    shift = np.empty(dim, dtype=np.int64)
    cell = np.empty(dim, dtype=np.int64)
    for i in range(n):
        first = nnz
        for o in range(noff):
            rem = o
            ok = True
            key = 0
            for k in range(dim - 1, -1, -1):
                shift[k] = rem % 3 - 1
                rem //= 3
            for k in range(dim):
                cell[k] = cc[i, k] + shift[k]
                if cell[k] < 0 or cell[k] >= ncell[k]:
                    ok = False
                    break
                key = key * ncell[k] + cell[k]
            if not ok or start[key] < 0:
                continue
            for s in range(start[key], end[key]):
                j = order[s]
                if j == i:
                    continue
                r2 = 0.0
                for k in range(dim):
                    d = pos[i, k] - pos[j, k]
                    r2 += d * d
                if r2 < r2max:
                    if nnz >= cap:
                        return offsets, indices, -1
                    # insertion keeps each list ascending
                    t = nnz
                    while t > first and indices[t - 1] > j:
                        indices[t] = indices[t - 1]
                        t -= 1
                    indices[t] = j
                    nnz += 1
        offsets[i + 1] = nnz
    return offsets, indices, nnz


def build_neighbors_arrays(pos: np.ndarray, radius: float):
    n, dim = pos.shape
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if not np.all(np.isfinite(pos)):
        bad = int(np.flatnonzero(~np.isfinite(pos).all(axis=1))[0])
        raise FloatingPointError(f"non-finite position at particle {bad}")
    cap = n * (64 if dim == 2 else 320)
    while True:
        offsets, indices, nnz = _build(pos, radius, cap)
        if nnz >= 0:
            return offsets, indices[:nnz].copy()
        cap *= 2


def build_neighbors(system: ParticleSystem, spec: KernelSpec) -> NeighborList:
    """Exact neighbour lists within the kernel support radius ``2h``."""
    offsets, indices = build_neighbors_arrays(system.pos, spec.support_radius)
    return NeighborList(offsets, indices, spec.support_radius)

