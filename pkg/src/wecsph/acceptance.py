"""Reference scenarios used by the acceptance suite.

Each function runs a complete (and mostly long) experiment and returns a
JSON-friendly dict of raw series and derived metrics.
"""
from __future__ import annotations

import os
import tempfile

import numpy as np

from .analysis import spectral_analysis
from .body import average_power
from .config import paper_default
from .runner import make_tank, run_simulation


def _base(dp: float, bodies: int):
    cfg = paper_default()
    cfg.tank.dp = dp
    cfg.tank.neighbor_skin = 0.25 * dp
    cfg.bodies.count = bodies
    return cfg


def crest_trough(t, eta, t0: float, T: float, n_periods: int):
    """Mean per-period maximum and minimum over ``n_periods`` periods from ``t0``."""
    crests, troughs = [], []
    for k in range(n_periods):
        m = (t >= t0 + k * T) & (t < t0 + (k + 1) * T)
        crests.append(float(eta[m].max()))
        troughs.append(float(eta[m].min()))
    return float(np.mean(crests)), float(np.mean(troughs)), crests, troughs


def regular_wave_run(seed: int = 0, dp: float = 0.02, t_end: float = 18.0, n_periods: int = 5):
    """Empty tank, H = 0.16 m, T = 1.5 s, gauge at mid-tank."""
    cfg = _base(dp, 0)
    cfg.simulate.gauges_x = [0.5 * cfg.tank.length]
    cfg.outputs.sample_dt = 0.01
    out = run_simulation(cfg, None, seed, t_end=t_end)
    T, H = cfg.waves.T, cfg.waves.H
    t0 = t_end - n_periods * T
    crest, trough, cs, ts = crest_trough(out.t, out.eta[:, 0], t0, T, n_periods)
    return {"dp": dp, "n_particles": out.runtime["n_particles"], "t": out.t, "eta": out.eta[:, 0],
            "window": [t0, t_end], "crest": crest, "trough": trough, "crests": cs, "troughs": ts,
            "crest_error": abs(crest - H / 2) / (H / 2), "trough_error": abs(-trough - H / 2) / (H / 2)}


def irregular_run(seed: int = 0, dp: float = 0.02, record: float = 200.0, spin_up: float = 20.0,
                  sample_dt: float = 0.1):
    """JONSWAP Hs = 0.16 m, Tp = 1.5 s, 50 components; spectrum of a mid-tank record."""
    cfg = _base(dp, 0)
    cfg.waves.kind = "irregular"
    cfg.waves.seed = seed
    cfg.simulate.gauges_x = [0.5 * cfg.tank.length]
    cfg.outputs.sample_dt = sample_dt
    out = run_simulation(cfg, None, seed, t_end=spin_up + record)
    m = out.t >= spin_up
    sp = spectral_analysis(out.eta[m, 0], sample_dt)
    return {"dp": dp, "Hs": sp.Hs, "Tp": sp.Tp, "f": sp.f, "S": sp.S,
            "Hs_error": abs(sp.Hs - cfg.waves.Hs) / cfg.waves.Hs,
            "Tp_error": abs(sp.Tp - cfg.waves.Tp) / cfg.waves.Tp}


def sweep_run(seed: int = 0, dp: float = 0.02, kp_list=(200, 450, 700, 950, 1200, 1500, 1800),
              t_end: float = 12.0, window: float = 6.0):
    """Average PTO power of a single PA versus constant damping."""
    cfg = _base(dp, 1)
    cfg.simulate.gauges_x = []
    cfg.outputs.sample_dt = 0.05
    P = []
    for kp in kp_list:
        out = run_simulation(cfg, None, seed, kp=float(kp), t_end=t_end)
        P.append(average_power(out.power[0], t_end - window, window))
    P = np.array(P)
    k = int(np.argmax(P))
    unimodal = bool(np.all(np.diff(P[:k + 1]) > 0) and np.all(np.diff(P[k:]) < 0))
    return {"dp": dp, "kp": list(kp_list), "P": P, "argmax_kp": float(kp_list[k]),
            "unimodal": unimodal, "window": [t_end - window, t_end]}


def decay_run(seed: int = 0, dp: float = 0.02, kps=(0.0, 240.0, 1100.0), v0: float = 0.25,
              settle: float = 1.0, t_end: float = 4.0, length: float = 4.0, sample_dt: float = 0.01):
    """Free heave decay in still water from an initial heave velocity, one run per kp.

    The body first floats freely (kp = 0) for ``settle`` seconds so that the
    fluid conforms to it; every run restarts from that snapshot with the body
    kicked upwards at ``v0``. ``dz`` is recorded about the settled position.
    """
    from .integrator import Simulation

    cfg = _base(dp, 1)
    cfg.waves.kind = "none"
    cfg.tank.length = length
    cfg.bodies.x_first = 0.5 * length
    tank = make_tank(cfg, seed, kp=0.0)
    sim = Simulation(tank.state, tank.setup)
    sim.run_until(settle)
    snap = sim.snapshot()
    n = int(round(t_end / sample_dt))
    out = {"dp": dp, "kp": list(kps), "v0": v0, "settle": settle,
           "t": [k * sample_dt for k in range(n + 1)], "dz": []}
    for kp in kps:
        sim.restore(snap)
        b = sim.state.bodies[0]
        z_eq = b.dz
        b.kp = kp
        b.V[-1] = v0
        b.v_prev = v0
        b.sync_particles(sim.state.system)
        dz = []
        for k in range(n + 1):
            sim.run_until(settle + k * sample_dt)
            dz.append(sim.state.bodies[0].dz - z_eq)
        out["dz"].append(dz)
    return out


def oscillation_peaks(z, floor: float = 0.0):
    """Peak |z| of each half-cycle of ``z`` (split at sign changes), in order.

    Half-cycles whose peak does not exceed ``floor`` are treated as noise and
    dropped, together with everything after the first such half-cycle.
    """
    z = np.asarray(z, dtype=np.float64)
    cross = np.flatnonzero(np.signbit(z[1:]) != np.signbit(z[:-1])) + 1
    edges = np.concatenate([[0], cross, [z.size]])
    peaks = []
    for a, b in zip(edges[:-1], edges[1:]):
        p = float(np.max(np.abs(z[a:b])))
        if p <= floor:
            break
        peaks.append(p)
    return peaks


def training_run(seed: int = 0, dp: float = 0.025, episodes: int = 60, eval_episodes: int = 10):
    """Single-PA learning signal at desk resolution for one seed."""
    from .cli import cmd_eval, cmd_train

    cfg = _base(dp, 1)
    cfg.episodes.N_e = episodes
    cfg.episodes.eval_episodes = eval_episodes
    with tempfile.TemporaryDirectory() as d:
        cfg.outputs.dir = d
        ck = cmd_train(cfg, seed)
        from .analysis import read_csv
        cols, data = read_csv(os.path.join(d, "training_log.csv"))
        rep = cmd_eval(cfg, ck, seed)
    ret = data[:, cols.index("return")]
    warm = ret[:cfg.rl.warmup_episodes].mean()
    last = ret[-10:].mean()
    return {"seed": seed, "returns": ret, "warmup_mean": float(warm), "last10_mean": float(last),
            "gain": float((last - warm) / abs(warm)),
            "total_improvement_pct": float(rep.rows()[-1]["improvement_pct"])}


def toy_sac_run(seed: int = 0, steps: int = 20_000, warmup_episodes: int = 10):
    """Single-agent SAC on the forced oscillator; deterministic-policy power vs optimum."""
    from .env.coupling import episode_loop, map_action
    from .env.toy import ToyEnv, ToyParams, toy_optimal_damping
    from .rl.masac import Masac, MasacConfig

    env = ToyEnv()
    episodes = steps // env.horizon
    cfg = MasacConfig(n_agents=1, obs_dim=env.obs_dim, n_min=warmup_episodes * env.horizon,
                      normalize_obs=False)
    m = Masac(cfg, seed=seed)
    episode_loop(env, m, episodes, warmup_episodes)
    m.freeze(True)
    kps = []

    def policy(obs):
        a = m.act(obs, deterministic=True)
        kps.append(map_action(float(a[0, 0]), env.mapping))
        return a

    p = ToyParams()
    kp_star = toy_optimal_damping(p.m, p.k_s, p.c_r, p.omega)
    P_pol = env.average_power(policy)
    P_star = env.average_power(lambda o: np.array([[(kp_star - env.mapping.k_base) / env.mapping.dk_max]]))
    return {"steps": episodes * env.horizon, "P_policy": P_pol, "P_star": P_star, "kp_star": kp_star,
            "mean_kp": float(np.mean(kps)), "ratio": P_pol / P_star}
