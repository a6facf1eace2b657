"""Build tanks from a :class:`RunConfig` and drive plain simulations."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .analysis import RunTimer, runtime_report, write_csv
from .body import PowerSeries
from .boundaries import gauge_elevation
from .config import RunConfig
from .geometry import BodySpec, Tank, TankSpec, build_tank
from .integrator import Simulation, write_particle_frame
from .waves import WaveMakerSpec, jonswap_components


def make_wavemaker(cfg: RunConfig, seed: int | None = None) -> WaveMakerSpec | None:
    w = cfg.waves
    d = cfg.tank.depth
    if w.kind == "none":
        return None
    if w.kind == "regular":
        return WaveMakerSpec.regular(w.H, w.T, d, w.theta, w.ramp, cfg.tank.g)
    spec = jonswap_components(w.Hs, w.Tp, w.gamma, w.n_components, w.f_start, w.f_stop,
                              w.seed if seed is None else seed, d, cfg.tank.g)
    return WaveMakerSpec.irregular(spec.components, d, w.Tp, w.ramp)


def tank_spec(cfg: RunConfig, gauges_x=(), kp: float | None = None) -> TankSpec:
    t, b = cfg.tank, cfg.bodies
    kp = b.k_base if kp is None else kp
    bodies = tuple(BodySpec(x=b.x_first + k * b.spacing, diameter=b.diameter, height=b.height,
                            draft=b.draft, mass=b.mass, dof=b.dof, kp=kp)
                   for k in range(b.count))
    return TankSpec(length=t.length, depth=t.depth, width=t.width, dp=t.dp, dim=t.dim,
                    freeboard=t.freeboard, n_layers=t.n_layers, cf=t.cf, rho0=t.rho0, g=t.g,
                    damping_length=t.damping_length, bodies=bodies,
                    gauges_x=tuple(gauges_x), gauge_offsets=tuple(b.gauge_offsets))


def make_tank(cfg: RunConfig, seed: int = 0, fixed_dt: float | None = None,
              gauges_x=(), kp: float | None = None) -> Tank:
    tank = build_tank(tank_spec(cfg, gauges_x, kp), make_wavemaker(cfg), seed=seed,
                      skin=cfg.tank.neighbor_skin, fixed_dt=fixed_dt, delta_dd=cfg.tank.delta_dd)
    tank.setup.c_cfl = cfg.tank.cfl
    return tank


@dataclass
class SimulationOutputs:
    t: np.ndarray
    eta: np.ndarray                # (samples, gauges)
    gauge_names: list
    bodies: list                   # per body: (samples, 8) rows of t, dz, vz, az, kp, F_pto, P, E
    power: list = field(default_factory=list)  # per body PowerSeries (every step)
    runtime: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)


BODY_COLUMNS = ["t", "dz", "vz", "az", "kp", "F_pto", "P", "E"]


def run_simulation(cfg: RunConfig, out_dir: str | None = None, seed: int = 0,
                   fixed_dt: float | None = None, kp: float | None = None,
                   t_end: float | None = None, callbacks=(), tank: Tank | None = None
                   ) -> SimulationOutputs:
    """Run one tank from t = 0 to ``t_end`` at constant damping.

    Gauges and bodies are sampled every ``outputs.sample_dt``; steps are
    clipped to land on sample instants. ``callbacks`` receive the
    :class:`Simulation` after every sample.
    """
    timer = RunTimer()
    t_end = cfg.simulate.t_end if t_end is None else t_end
    gx = cfg.simulate.gauges_x
    if tank is None:
        tank = make_tank(cfg, seed, fixed_dt, gx, cfg.simulate.kp if kp is None else kp)
    sim = Simulation(tank.state, tank.setup)
    gauges = tank.gauges + [g for gl in tank.body_gauges for g in gl]
    names = [g.name for g in gauges]
    nb = len(sim.state.bodies)
    series = [PowerSeries() for _ in range(nb)]
    lvl = tank.setup.still_level

    def body_rows():
        rows = []
        for k, b in enumerate(sim.state.bodies):
            s = series[k]
            P = s.P[-1] if s.P else 0.0
            rows.append([sim.state.t, b.dz, b.vz, b.a_z, b.kp, b.pto_z, P, s.E])
        return rows

    def on_step(s):
        for k, b in enumerate(s.state.bodies):
            series[k].record(s.state.t, b.kp, b.vz, b.v_prev)

    for k, b in enumerate(sim.state.bodies):
        series[k].record(0.0, b.kp, b.vz, b.v_prev)

    ts, etas, brows = [], [], [[] for _ in range(nb)]
    n_samples = int(math.floor(t_end / cfg.outputs.sample_dt + 1e-9)) if t_end > 0 else -1
    frame_every = cfg.outputs.frame_dt
    next_frame = 0.0
    frames = 0
    for k in range(n_samples + 1):
        tk = min(k * cfg.outputs.sample_dt, t_end)
        with timer.track("sph"):
            sim.run_until(tk, on_step)
        with timer.track("io"):
            ts.append(sim.state.t)
            etas.append([gauge_elevation(sim.state.system, g, tank.setup.kernel, lvl) for g in gauges])
            for j, r in enumerate(body_rows()):
                brows[j].append(r)
            if out_dir and frame_every and sim.state.t >= next_frame - 1e-12:
                write_particle_frame(os.path.join(out_dir, f"frame_{frames:05d}.csv"), sim.state.system)
                frames += 1
                next_frame += frame_every
        for cb in callbacks:
            cb(sim)
    if n_samples < 0:
        ts = []
    out = SimulationOutputs(np.array(ts), np.array(etas).reshape(len(ts), len(gauges)), names,
                            [np.array(r).reshape(-1, len(BODY_COLUMNS)) for r in brows], series)
    out.runtime = runtime_report(timer, sim.state.system.n)
    if out_dir:
        with timer.track("io"):
            os.makedirs(out_dir, exist_ok=True)
            h = cfg.hash()
            p = os.path.join(out_dir, "gauges.csv")
            write_csv(p, ["t"] + names, [[t, *e] for t, e in zip(out.t, out.eta)], h, seed)
            out.files["gauges"] = p
            for j in range(nb):
                p = os.path.join(out_dir, f"body{j}.csv")
                write_csv(p, BODY_COLUMNS, out.bodies[j].tolist(), h, seed)
                out.files[f"body{j}"] = p
        out.runtime = runtime_report(timer, sim.state.system.n)
        p = os.path.join(out_dir, "runtime.csv")
        keys = sorted(out.runtime)
        write_csv(p, keys, [[out.runtime[k] for k in keys]], cfg.hash(), seed)
        out.files["runtime"] = p
    out.sim = sim
    return out
