"""Command-line entry point: simulate | sweep | train | eval | analyze."""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .analysis import EnergyReport, RunTimer, read_csv, runtime_report, spectral_analysis, write_csv
from .body import average_power
from .config import RunConfig, parse_config, paper_default
from .env.coupling import (ActionMapping, EpisodeConfig, RewardSpec, SphWecEnv, episode_loop,
                           run_policy_episode)
from .integrator import Simulation
from .rl.checkpoint import load_checkpoint, save_checkpoint
from .rl.masac import Masac, MasacConfig
from .runner import make_tank, run_simulation

log = logging.getLogger("wecsph")


def load_config(args) -> RunConfig:
    if args.config:
        cfg = parse_config(args.config)
        if args.dim is not None and args.dim != cfg.tank.dim:
            cfg.tank.dim = args.dim
    else:
        cfg = paper_default(args.dim or 2)
    if args.out:
        cfg.outputs.dir = args.out
    cfg.validate()
    os.makedirs(cfg.outputs.dir, exist_ok=True)
    with open(os.path.join(cfg.outputs.dir, "config.resolved.yaml"), "w") as fh:
        fh.write(cfg.dump())
    return cfg


def masac_config(cfg: RunConfig, n_agents: int, steps_per_episode: int) -> MasacConfig:
    r = cfg.rl
    n_min = max(r.warmup_episodes * steps_per_episode, r.batch_size)
    return MasacConfig(n_agents=n_agents, obs_dim=11, act_dim=1, gamma=r.gamma, tau=r.tau,
                       lr_actor=r.lr_actor, lr_critic=r.lr_critic, lr_alpha=r.lr_alpha,
                       batch_size=r.batch_size, buffer_size=r.buffer_size,
                       target_entropy=r.target_entropy, init_alpha=r.init_alpha,
                       n_min=n_min, hidden=tuple(r.hidden), entropy_sum=r.entropy_sum,
                       normalize_obs=r.normalize_obs, scale_rewards=r.scale_rewards)


def make_env(cfg: RunConfig, seed: int, fixed_dt=None) -> SphWecEnv:
    if cfg.bodies.count < 1:
        raise ValueError("training needs at least one body (bodies.count >= 1)")
    tank = make_tank(cfg, seed, fixed_dt)
    sim = Simulation(tank.state, tank.setup)
    e = cfg.episodes
    mapping = ActionMapping(cfg.bodies.k_base, cfg.rl.dk_frac, cfg.rl.dt_ctrl)
    ep = EpisodeConfig(e.T_e, e.t_e, e.N_e, e.eval_episodes, cfg.rl.warmup_episodes)
    return SphWecEnv(sim, tank.body_gauges, mapping, ep, RewardSpec(cfg.rl.gamma_p))


def cmd_simulate(cfg: RunConfig, seed: int = 0, fixed_dt=None) -> dict:
    out = run_simulation(cfg, cfg.outputs.dir, seed, fixed_dt)
    return out.files


def cmd_sweep(cfg: RunConfig, kp_list=None, seed: int = 0, fixed_dt=None) -> np.ndarray:
    """Average power over the final ``sweep.window`` seconds for each kp."""
    if cfg.bodies.count < 1:
        raise ValueError("sweep needs at least one body")
    kp_list = cfg.sweep.kp if kp_list is None else kp_list
    rows = []
    for kp in kp_list:
        out = run_simulation(cfg, None, seed, fixed_dt, kp=float(kp), t_end=cfg.sweep.t_end)
        t0 = cfg.sweep.t_end - cfg.sweep.window
        pbar = [average_power(s, t0, cfg.sweep.window) for s in out.power]
        rows.append([float(kp), *pbar, float(np.sum(pbar))])
        log.info("kp=%s mean power %s", kp, pbar)
    cols = ["kp"] + [f"P{k}" for k in range(cfg.bodies.count)] + ["P_total"]
    write_csv(os.path.join(cfg.outputs.dir, "sweep.csv"), cols, rows, cfg.hash(), seed)
    return np.array(rows)


TRAIN_COLUMNS = ["episode", "agent", "return", "mean_kp", "alpha", "critic_loss", "policy_loss"]


def cmd_train(cfg: RunConfig, seed: int = 0, fixed_dt=None, checkpoint: str | None = None) -> str:
    timer = RunTimer()
    env = make_env(cfg, seed, fixed_dt)
    out_dir = cfg.outputs.dir
    snap_path = os.path.join(out_dir, "snapshot.bin")
    with timer.track("sph"):
        env.prepare()
    with open(snap_path, "wb") as fh:
        fh.write(env.snap)
    if checkpoint:
        m, _ = load_checkpoint(checkpoint)
    else:
        m = Masac(masac_config(cfg, env.n_agents, env.n_steps), seed=seed)
    rows = []
    ck_path = os.path.join(out_dir, "checkpoint.bin")

    def on_episode(ep, ep_rows):
        rows.extend(ep_rows)
        with timer.track("io"):
            write_csv(os.path.join(out_dir, "training_log.csv"), TRAIN_COLUMNS,
                      [[r[c] for c in TRAIN_COLUMNS] for r in rows], cfg.hash(), seed)
            if (ep + 1) % cfg.episodes.checkpoint_every == 0:
                save_checkpoint(os.path.join(out_dir, f"checkpoint_ep{ep + 1:04d}.bin"), m)
        log.info("episode %d returns %s", ep, [round(r["return"], 4) for r in ep_rows])

    env.sph_time = 0.0
    episode_loop(env, m, cfg.episodes.N_e, cfg.rl.warmup_episodes, on_episode)
    timer.add("sph", env.sph_time)
    timer.add("rl", sum(r["rl_time"] for r in rows if r["agent"] == 0))
    with timer.track("io"):
        save_checkpoint(ck_path, m)
    rep = runtime_report(timer, env.sim.state.system.n)
    keys = sorted(rep)
    write_csv(os.path.join(out_dir, "runtime.csv"), keys, [[rep[k] for k in keys]], cfg.hash(), seed)
    return ck_path


EVAL_COLUMNS = ["t", "agent", "eta_u", "eta_d", "dz", "vz", "Fz", "kp", "P"]


def cmd_eval(cfg: RunConfig, checkpoint: str, seed: int = 0, fixed_dt=None) -> EnergyReport:
    """Deterministic policy vs constant k_base on the same snapshot, per episode."""
    if not checkpoint or not os.path.exists(checkpoint):
        raise FileNotFoundError(f"checkpoint not found: {checkpoint}")
    m, _ = load_checkpoint(checkpoint)
    m.freeze(True)
    env = make_env(cfg, seed, fixed_dt)
    env.prepare()
    n = env.n_agents
    e_drl = np.zeros(n)
    e_base = np.zeros(n)
    trace = []
    for _ in range(cfg.episodes.eval_episodes):
        env.record = True
        res = run_policy_episode(env, lambda s: m.act(s, deterministic=True))
        trace += env.trace
        e_drl += res["energy"]
        env.record = False
        e_base += run_policy_episode(env, lambda s: np.zeros((n, 1)))["energy"]
    rep = EnergyReport(e_drl, e_base)
    out_dir = cfg.outputs.dir
    rows = rep.rows()
    cols = ["agent", "E_drl", "E_0", "dE", "improvement_pct"]
    write_csv(os.path.join(out_dir, "energy_report.csv"), cols, [[r[c] for c in cols] for r in rows],
              cfg.hash(), seed)
    write_csv(os.path.join(out_dir, "eval_trace.csv"), EVAL_COLUMNS, trace, cfg.hash(), seed)
    return rep


def cmd_analyze(series_path: str, out_dir: str, seed: int = 0, nperseg: int = 512) -> list[dict]:
    """Spectrum and statistics of every gauge column in a gauge CSV."""
    cols, data = read_csv(series_path)
    if cols[0] != "t" or data.shape[0] < 2:
        raise ValueError(f"{series_path}: expected a time column 't' and at least two samples")
    t = data[:, 0]
    dt = float(np.mean(np.diff(t)))
    if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-9):
        raise ValueError(f"{series_path}: non-uniform sampling")
    stats = []
    spectra = []
    for j, name in enumerate(cols[1:], start=1):
        sp = spectral_analysis(data[:, j], dt, nperseg)
        stats.append({"gauge": name, "Hs": sp.Hs, "Tp": sp.Tp, "m0": sp.m0,
                      "eta_max": float(data[:, j].max()), "eta_min": float(data[:, j].min())})
        spectra.append(sp)
    os.makedirs(out_dir, exist_ok=True)
    scols = ["gauge", "Hs", "Tp", "m0", "eta_max", "eta_min"]
    write_csv(os.path.join(out_dir, "stats.csv"), scols, [[s[c] for c in scols] for s in stats], "-", seed)
    f = spectra[0].f
    write_csv(os.path.join(out_dir, "spectrum.csv"), ["f"] + cols[1:],
              [[f[i], *[sp.S[i] for sp in spectra]] for i in range(f.size)], "-", seed)
    return stats


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wecsph", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "train", "eval", "analyze"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="YAML run configuration")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--checkpoint", default=None)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--fixed-dt", type=float, default=None, help="regression mode time step")
        sp.add_argument("--dim", type=int, choices=(2, 3), default=None)
        if name == "sweep":
            sp.add_argument("--kp", type=float, nargs="+", default=None)
        if name == "analyze":
            sp.add_argument("series", help="gauge CSV produced by simulate")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            out = args.out or os.path.dirname(os.path.abspath(args.series))
            for s in cmd_analyze(args.series, out, args.seed):
                print(f"{s['gauge']}: Hs={s['Hs']:.4f} m Tp={s['Tp']:.3f} s")
            return 0
        cfg = load_config(args)
        if args.command == "simulate":
            files = cmd_simulate(cfg, args.seed, args.fixed_dt)
            print("\n".join(f"{k}: {v}" for k, v in files.items()))
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, args.kp, args.seed, args.fixed_dt)
            for r in rows:
                print(f"kp={r[0]:g} P={r[-1]:.4f} W")
        elif args.command == "train":
            print(cmd_train(cfg, args.seed, args.fixed_dt, args.checkpoint))
        elif args.command == "eval":
            rep = cmd_eval(cfg, args.checkpoint, args.seed, args.fixed_dt)
            for r in rep.rows():
                print(f"{r['agent']}: E_drl={r['E_drl']:.3f} E_0={r['E_0']:.3f} ({r['improvement_pct']:+.2f}%)")
    except (ValueError, FileNotFoundError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
