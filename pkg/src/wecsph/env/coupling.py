"""Bridge between the SPH tank and the learners.

Each control interval: read per-PA observations, map the joint action to
damping targets, ramp kp linearly from the previous targets across the
interval while the tank advances, then reward interval-mean PTO power.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from ..body import average_power, instantaneous_power
from ..boundaries import gauge_elevation
from ..integrator import Simulation

log = logging.getLogger(__name__)

OBS_DIM = 11


@dataclass(frozen=True)
class ActionMapping:
    k_base: float = 700.0
    dk_frac: float = 0.9
    dt_ctrl: float = 0.1

    def __post_init__(self):
        if not (self.k_base > 0 and 0 <= self.dk_frac < 1 and self.dt_ctrl > 0):
            raise ValueError("need k_base > 0, 0 <= dk_frac < 1, dt_ctrl > 0")

    @property
    def dk_max(self) -> float:
        return self.dk_frac * self.k_base


def map_action(o: float, mapping: ActionMapping) -> float:
    """kp = k_base + o dk_max, with o clamped to [-1, 1]."""
    if not -1.0 <= o <= 1.0:
        log.warning("action %r outside [-1, 1]; clamped", o)
        o = min(max(o, -1.0), 1.0)
    return mapping.k_base + o * mapping.dk_max


def interpolate_kp(t: float, kp_prev: float, kp_next: float, t0: float, t1: float) -> float:
    """Linear ramp from ``kp_prev`` at ``t0`` to ``kp_next`` at ``t1``."""
    if t1 <= t0:
        raise ValueError("interval must have positive length")
    w = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
    return kp_prev + w * (kp_next - kp_prev)


@dataclass(frozen=True)
class RewardSpec:
    gamma_p: float = 0.7

    def __post_init__(self):
        if not 0.0 <= self.gamma_p <= 1.0:
            raise ValueError("gamma_p must lie in [0, 1]")


def compute_rewards(P, spec: RewardSpec = RewardSpec()) -> np.ndarray:
    """r_i = (1 - gamma_p) P_i + gamma_p mean(P)."""
    P = np.asarray(P, dtype=np.float64)
    if np.any(P < 0):
        raise ValueError("interval powers must be non-negative")
    return (1.0 - spec.gamma_p) * P + spec.gamma_p * P.mean()


@dataclass(frozen=True)
class EpisodeConfig:
    T_e: float = 10.0
    t_e: float = 10.0
    N_e: int = 100
    eval_episodes: int = 10
    warmup_episodes: int = 10

    @classmethod
    def paper_default(cls, dim: int = 2) -> "EpisodeConfig":
        return cls(10.0, 10.0, 100) if dim == 2 else cls(20.0, 10.0, 50)


class SphWecEnv:
    """Episodic multi-PA environment over a :class:`Simulation`.

    Observation per agent (11 values): four gauge elevations ordered by x,
    their backward-difference rates over the control interval, previous-step
    heave velocity, heave displacement and heave acceleration.
    """

    obs_dim = OBS_DIM

    def __init__(self, sim: Simulation, body_gauges, mapping: ActionMapping,
                 episode: EpisodeConfig, reward: RewardSpec = RewardSpec()):
        self.sim = sim
        self.gauges = body_gauges
        self.mapping = mapping
        self.episode = episode
        self.reward = reward
        self.n_agents = len(sim.state.bodies)
        if self.n_agents == 0 or any(len(g) != 4 for g in body_gauges):
            raise ValueError("each PA needs exactly four gauges")
        self.n_steps = int(round(episode.T_e / mapping.dt_ctrl))
        self.snap: bytes | None = None
        self.eta_snap = None
        self.sph_time = 0.0
        self.trace = []
        self.record = False

    # -- observation ---------------------------------------------------------

    def elevations(self) -> np.ndarray:
        s = self.sim
        spec = s.setup.kernel
        lvl = s.setup.still_level
        return np.array([[gauge_elevation(s.state.system, g, spec, lvl) for g in gl]
                         for gl in self.gauges])

    def extract_observation(self, agent_id: int, eta=None, eta_prev=None) -> np.ndarray:
        eta = self.elevations() if eta is None else eta
        eta_prev = eta if eta_prev is None else eta_prev
        b = self.sim.state.bodies[agent_id]
        deta = (eta[agent_id] - eta_prev[agent_id]) / self.mapping.dt_ctrl
        obs = np.concatenate([eta[agent_id], deta, [b.v_prev, b.dz, b.a_z]])
        if not np.all(np.isfinite(obs)):
            raise FloatingPointError(f"non-finite observation for agent {agent_id}: {obs}")
        return obs

    def _joint_obs(self, eta, eta_prev):
        return np.stack([self.extract_observation(i, eta, eta_prev) for i in range(self.n_agents)])

    # -- lifecycle -----------------------------------------------------------

    def _advance(self, t_end, kp0, kp1, t0):
        """Advance to ``t_end`` with ramped kp; returns per-PA interval-mean power."""
        sim = self.sim
        sim.kp_schedule = lambda t, k: interpolate_kp(t, kp0[k], kp1[k], t0, t_end)
        ts = [sim.state.t]
        Ps = [self.last_P.copy()]
        tic = time.perf_counter()

        def rec(s):
            ts.append(s.state.t)
            Ps.append(np.array([instantaneous_power(b.kp, b.vz, b.v_prev) for b in s.state.bodies]))

        sim.run_until(t_end, rec)
        self.sph_time += time.perf_counter() - tic
        sim.kp_schedule = None
        t = np.array(ts)
        P = np.array(Ps)
        self.last_P = P[-1].copy()
        return np.array([average_power((t, P[:, k]), t0, t_end - t0) for k in range(self.n_agents)])

    def prepare(self) -> bytes:
        """Run from the current state to t_e at constant k_base and snapshot."""
        ep, dt = self.episode, self.mapping.dt_ctrl
        kb = np.full(self.n_agents, self.mapping.k_base)
        for b in self.sim.state.bodies:
            b.kp = self.mapping.k_base
        self.last_P = np.zeros(self.n_agents)
        t_prev = ep.t_e - dt
        if self.sim.state.t < t_prev:
            self._advance(t_prev, kb, kb, self.sim.state.t)
        self.eta_snap = self.elevations()
        self._advance(ep.t_e, kb, kb, self.sim.state.t)
        self.snap = self.sim.snapshot()
        return self.snap

    def reset(self) -> np.ndarray:
        if self.snap is None:
            self.prepare()
        self.sim.restore(self.snap)
        self.kp_prev = np.full(self.n_agents, self.mapping.k_base)
        self.last_P = np.array([instantaneous_power(self.mapping.k_base, b.vz, b.v_prev)
                                for b in self.sim.state.bodies])
        self.t0 = self.sim.state.t
        self.k = 0
        eta = self.elevations()
        obs = self._joint_obs(eta, self.eta_snap)
        self.eta_prev = eta
        self.trace = []
        return obs

    def step(self, action):
        a = np.asarray(action, dtype=np.float64).reshape(self.n_agents, -1)[:, 0]
        kp_new = np.array([map_action(float(o), self.mapping) for o in a])
        dt = self.mapping.dt_ctrl
        t_start = self.t0 + self.k * dt
        t_end = self.t0 + (self.k + 1) * dt
        P = self._advance(t_end, self.kp_prev, kp_new, t_start)
        self.kp_prev = kp_new
        self.k += 1
        eta = self.elevations()
        obs = self._joint_obs(eta, self.eta_prev)
        self.eta_prev = eta
        if self.record:
            for i, b in enumerate(self.sim.state.bodies):
                self.trace.append((self.sim.state.t, i, eta[i, 1], eta[i, 2], b.dz, b.vz,
                                   b.force_z, b.kp, P[i]))
        done = self.k >= self.n_steps
        return obs, compute_rewards(P, self.reward), done, {"kp": kp_new, "power": P}


def episode_loop(env, masac, n_episodes: int, warmup_episodes: int = 10,
                 on_episode=None) -> list[dict]:
    """Alternate environment control intervals and learner updates.

    Returns one log row per (episode, agent). ``on_episode(ep, rows)`` is
    called after each episode (checkpointing, CSV flushing).
    """
    rows = []
    for ep in range(n_episodes):
        s = env.reset()
        returns = np.zeros(env.n_agents)
        kps = []
        diag_acc = []
        done = False
        tic_rl = 0.0
        while not done:
            tic = time.perf_counter()
            a = masac.act(s, random=ep < warmup_episodes)
            tic_rl += time.perf_counter() - tic
            s2, r, done, info = env.step(a)
            tic = time.perf_counter()
            diag = masac.train_step(s, a, r, s2, float(done))
            tic_rl += time.perf_counter() - tic
            if diag is not None:
                diag_acc.append(diag)
            returns += r
            kps.append(info["kp"])
            s = s2
        kps = np.array(kps)
        ep_rows = []
        for i in range(env.n_agents):
            ep_rows.append({
                "episode": ep, "agent": i, "return": float(returns[i]),
                "mean_kp": float(kps[:, i].mean()),
                "alpha": float(masac.agents[i].alpha),
                "critic_loss": float(np.mean([d["critic_loss"][i] for d in diag_acc])) if diag_acc else float("nan"),
                "policy_loss": float(np.mean([d["policy_loss"][i] for d in diag_acc])) if diag_acc else float("nan"),
                "rl_time": tic_rl,
            })
        rows += ep_rows
        if on_episode is not None:
            on_episode(ep, ep_rows)
    return rows


def run_policy_episode(env, policy_fn) -> dict:
    """One episode with ``policy_fn(obs) -> joint action``; per-agent energy and return."""
    s = env.reset()
    done = False
    returns = np.zeros(env.n_agents)
    energy = np.zeros(env.n_agents)
    dt = getattr(getattr(env, "mapping", None), "dt_ctrl", 1.0)
    while not done:
        s, r, done, info = env.step(policy_fn(s))
        returns += r
        energy += info["power"] * dt
    return {"return": returns, "energy": energy}
