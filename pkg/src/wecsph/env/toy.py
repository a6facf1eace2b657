"""Forced damped oscillator with a linear damper: a cheap stand-in for a heaving PA.

    m z'' = F0 sin(w t) - c_r z' - k_s z - kp z'

Absorbed power ``kp z'^2`` is maximised over constant kp by impedance
matching: ``kp* = sqrt(c_r^2 + ((k_s - m w^2) / w)^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import ActionMapping, map_action


@dataclass(frozen=True)
class ToyParams:
    m: float = 1.0
    k_s: float = 4.0
    c_r: float = 0.5
    omega: float = 1.0
    F0: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.k_s > 0 and self.c_r > 0 and self.omega > 0):
            raise ValueError("toy oscillator needs m, k_s, c_r, omega > 0")


@dataclass
class ToyState:
    z: float = 0.0
    v: float = 0.0
    t: float = 0.0


def toy_env_step(state: ToyState, kp: float, dt: float, p: ToyParams = ToyParams()):
    """One semi-implicit Euler step; returns ``(state', kp v'^2)``."""
    f = p.F0 * math.sin(p.omega * state.t) - p.c_r * state.v - p.k_s * state.z - kp * state.v
    v = state.v + dt * f / p.m
    z = state.z + dt * v
    return ToyState(z, v, state.t + dt), kp * v * v


def toy_optimal_damping(m: float, k_s: float, c_r: float, omega: float) -> float:
    if not (m > 0 and k_s > 0 and c_r > 0 and omega > 0):
        raise ValueError("m, k_s, c_r, omega must be positive")
    x = (k_s - m * omega * omega) / omega
    return math.sqrt(c_r * c_r + x * x)


def toy_steady_power(kp: float, p: ToyParams = ToyParams()) -> float:
    """Analytic period-mean power of the steady response."""
    x = (p.k_s - p.m * p.omega ** 2) / p.omega
    return 0.5 * p.F0 ** 2 * kp / ((p.c_r + kp) ** 2 + x * x)


class ToyEnv:
    """Episodic wrapper: one control step spans one forcing period.

    Observation: (z, z') at the start of the period. Reward: period-mean
    absorbed power. Episodes start from rest and last ``horizon`` periods.
    """

    n_agents = 1
    obs_dim = 2

    def __init__(self, params: ToyParams = ToyParams(), mapping: ActionMapping | None = None,
                 horizon: int = 25, substeps: int = 200):
        self.p = params
        self.mapping = mapping or ActionMapping(k_base=2.0)
        self.horizon = horizon
        self.substeps = substeps
        self.dt = 2.0 * math.pi / params.omega / substeps
        self.state = ToyState()
        self.k = 0

    def reset(self):
        self.state = ToyState()
        self.k = 0
        return self._obs()

    def _obs(self):
        return np.array([[self.state.z, self.state.v]])

    def run_period(self, kp: float) -> float:
        e = 0.0
        for _ in range(self.substeps):
            self.state, pw = toy_env_step(self.state, kp, self.dt, self.p)
            e += pw
        return e / self.substeps

    def step(self, action):
        kp = map_action(float(np.asarray(action).ravel()[0]), self.mapping)
        power = self.run_period(kp)
        self.k += 1
        done = self.k >= self.horizon
        return self._obs(), np.array([power]), done, {"kp": np.array([kp]), "power": np.array([power])}

    def average_power(self, kp_fn, skip: int = 10) -> float:
        """Mean power over the last ``horizon - skip`` periods of one episode."""
        obs = self.reset()
        acc = []
        for k in range(self.horizon):
            obs, r, _, _ = self.step(kp_fn(obs))
            if k >= skip:
                acc.append(r[0])
        return float(np.mean(acc))
