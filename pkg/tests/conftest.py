import numpy as np
import pytest

from wecsph.config import paper_default

ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="recompute long acceptance simulations instead of reading recorded results")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="long run; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_config(tmp_path=None, bodies: int = 1):
    """A 2.5 m x 0.5 m tank at dp = 0.05 with one small-wave absorber."""
    cfg = paper_default()
    cfg.tank.length = 2.5
    cfg.tank.depth = 0.5
    cfg.tank.dp = 0.05
    cfg.tank.damping_length = 0.5
    cfg.waves.H = 0.04
    cfg.waves.T = 1.0
    cfg.bodies.count = bodies
    cfg.bodies.x_first = 1.1
    cfg.bodies.k_base = 300.0
    cfg.episodes.T_e = 0.5
    cfg.episodes.t_e = 0.5
    cfg.episodes.N_e = 5
    cfg.episodes.eval_episodes = 1
    cfg.episodes.checkpoint_every = 2
    cfg.rl.warmup_episodes = 2
    cfg.rl.batch_size = 8
    cfg.rl.hidden = [16, 16]
    cfg.simulate.t_end = 0.3
    cfg.simulate.gauges_x = [1.8]
    cfg.outputs.sample_dt = 0.05
    if tmp_path is not None:
        cfg.outputs.dir = str(tmp_path)
    return cfg.validate()


@pytest.fixture(scope="session")
def still_water():
    """A 1 m x 0.5 m still-water column (no wavemaker) relaxed for 5 s at dp = 0.02.

    Shared by the hydrostatic unit tests and the acceptance line; about two
    minutes on one core.
    """
    from wecsph.boundaries import GaugeSpec, gauge_elevation
    from wecsph.geometry import TankSpec, build_tank
    from wecsph.integrator import Simulation, mechanical_energy
    from wecsph.sph.particles import Kind

    dp, depth = 0.02, 0.5
    tank = build_tank(TankSpec(length=1.0, depth=depth, dp=dp, piston=False), skin=0.005)
    sim = Simulation(tank.state, tank.setup)
    gauges = [GaugeSpec(x) for x in (0.25, 0.5, 0.75)]
    t, E, eta = [], [], []
    for k in range(51):
        sim.run_until(0.1 * k)
        s = sim.state.system
        t.append(sim.state.t)
        E.append(mechanical_energy(s, tank.setup.g))
        eta.append([gauge_elevation(s, g, tank.setup.kernel, depth) for g in gauges])
    s = sim.state.system
    _, acc, _ = sim._evaluate(s, [], 0.0)
    fluid = s.kind == Kind.FLUID
    wall = s.kind == Kind.WALL
    below = np.flatnonzero(wall & (np.abs(s.pos[:, 0] - 0.5) < 0.51 * dp) & (np.abs(s.pos[:, 1] + 0.5 * dp) < 1e-3))
    return {"dp": dp, "depth": depth, "rho0": 1000.0, "g": tank.setup.g, "steps": sim.state.step,
            "t": np.array(t), "E": np.array(E), "eta": np.array(eta),
            "acc": np.linalg.norm(acc[fluid], axis=1), "wall_p": s.p[below]}
