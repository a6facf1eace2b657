"""Ring buffer of joint transitions and running normalisers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Batch:
    s: np.ndarray   # (B, N, obs)
    a: np.ndarray   # (B, N, act)
    r: np.ndarray   # (B, N)
    s2: np.ndarray  # (B, N, obs)
    d: np.ndarray   # (B,)


class ReplayBuffer:
    """FIFO ring buffer; batches are drawn uniformly without replacement."""

    def __init__(self, n_agents: int, obs_dim: int, act_dim: int, capacity: int = 100_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, n_agents, obs_dim))
        self.a = np.zeros((capacity, n_agents, act_dim))
        self.r = np.zeros((capacity, n_agents))
        self.s2 = np.zeros((capacity, n_agents, obs_dim))
        self.d = np.zeros(capacity)
        self.ptr = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, s, a, r, s2, d) -> None:
        i = self.ptr
        self.s[i] = s
        self.a[i] = np.reshape(a, self.a.shape[1:])
        self.r[i] = r
        self.s2[i] = s2
        self.d[i] = float(d)
        self.ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        if batch_size > self.size:
            raise ValueError(f"batch of {batch_size} requested from {self.size} transitions")
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return Batch(self.s[idx], self.a[idx], self.r[idx], self.s2[idx], self.d[idx])

    def state_arrays(self, prefix: str) -> dict:
        n = self.size
        return {f"{prefix}.s": self.s[:n], f"{prefix}.a": self.a[:n], f"{prefix}.r": self.r[:n],
                f"{prefix}.s2": self.s2[:n], f"{prefix}.d": self.d[:n],
                f"{prefix}.ptr": np.array([self.ptr, self.size], dtype=np.int64)}

    def load_arrays(self, arrays: dict, prefix: str) -> None:
        ptr, size = (int(v) for v in arrays[f"{prefix}.ptr"])
        for name in ("s", "a", "r", "s2", "d"):
            getattr(self, name)[:size] = arrays[f"{prefix}.{name}"]
        self.ptr, self.size = ptr, size


class RunningNormalizer:
    """Per-feature running mean/variance (parallel Welford updates).

    ``frozen`` stops the statistics from changing (evaluation runs).
    """

    def __init__(self, dim: int, clip: float = 10.0, eps: float = 1e-8):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 0.0
        self.clip = clip
        self.eps = eps
        self.frozen = False

    def update(self, x) -> None:
        if self.frozen:
            return
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = x.shape[0]
        bm = x.mean(axis=0)
        bv = x.var(axis=0)
        tot = self.count + n
        delta = bm - self.mean
        self.mean = self.mean + delta * n / tot
        m2 = self.var * self.count + bv * n + delta * delta * self.count * n / tot
        self.var = m2 / tot
        self.count = tot

    def __call__(self, x):
        if self.count == 0:
            return np.asarray(x, dtype=np.float64)
        z = (np.asarray(x, dtype=np.float64) - self.mean) / np.sqrt(self.var + self.eps)
        return np.clip(z, -self.clip, self.clip)


class RewardScaler:
    """Divides rewards by a running estimate of their standard deviation."""

    def __init__(self, eps: float = 1e-8):
        self.stats = RunningNormalizer(1)
        self.eps = eps

    def __call__(self, r, update: bool = True):
        r = np.asarray(r, dtype=np.float64)
        if update:
            self.stats.update(r.reshape(-1, 1))
        if self.stats.count < 2:
            return r
        return r / np.sqrt(self.stats.var[0] + self.eps)
