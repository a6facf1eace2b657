"""Symplectic stepping, CFL control, snapshot/restore and run orchestration."""
import csv
import math

import numpy as np
import pytest

from conftest import tiny_config
from wecsph.geometry import BodySpec, TankSpec, build_tank
from wecsph.integrator import (Simulation, SimulationState, SolverSetup, cfl_timestep,
                               restore, snapshot, symplectic_step, write_particle_frame)
from wecsph.runner import run_simulation
from wecsph.sph import EosSpec, KernelSpec, ParticleSystem
from wecsph.sph.particles import Kind

G = 9.81


def _eos(cf):
    return EosSpec(cf=cf)


# -- CFL -----------------------------------------------------------------------

def test_cfl_acoustic_bound():
    spec = KernelSpec(0.01)  # h = 0.02
    sys_ = ParticleSystem.from_arrays(np.zeros((2, 2)), dp=0.01)
    assert cfl_timestep(sys_, np.zeros((2, 2)), spec, _eos(40.0)) == pytest.approx(1e-4, rel=1e-14)


def test_cfl_gravity_candidate_loses_to_acoustic():
    spec = KernelSpec(0.01)
    sys_ = ParticleSystem.from_arrays(np.zeros((2, 2)), dp=0.01)
    acc = np.array([[0.0, -G], [0.0, 0.0]])
    assert math.sqrt(spec.h / G) == pytest.approx(0.0452, abs=1e-4)
    assert cfl_timestep(sys_, acc, spec, _eos(40.0)) == pytest.approx(1e-4, rel=1e-14)


def test_cfl_force_bound_wins_for_large_acceleration():
    spec = KernelSpec(0.01)
    sys_ = ParticleSystem.from_arrays(np.zeros((1, 2)), dp=0.01)
    acc = np.array([[0.0, 1e5]])
    assert cfl_timestep(sys_, acc, spec, _eos(40.0)) == pytest.approx(0.2 * math.sqrt(0.02 / 1e5))


def test_cfl_doubling_sound_speed_halves_step():
    spec = KernelSpec(0.01)
    sys_ = ParticleSystem.from_arrays(np.zeros((2, 2)), dp=0.01)
    a = cfl_timestep(sys_, np.zeros((2, 2)), spec, _eos(40.0))
    b = cfl_timestep(sys_, np.zeros((2, 2)), spec, _eos(80.0))
    assert b == pytest.approx(a / 2, rel=1e-14)


def test_cfl_ignores_wall_accelerations():
    spec = KernelSpec(0.01)
    sys_ = ParticleSystem.from_arrays(np.zeros((2, 2)), kind=[Kind.FLUID, Kind.WALL], dp=0.01)
    acc = np.array([[0.0, 0.0], [0.0, 1e9]])
    assert cfl_timestep(sys_, acc, spec, _eos(40.0)) == pytest.approx(1e-4)


def test_cfl_rejects_non_finite():
    spec = KernelSpec(0.01)
    sys_ = ParticleSystem.from_arrays(np.zeros((1, 2)), dp=0.01)
    with pytest.raises(FloatingPointError):
        cfl_timestep(sys_, np.array([[np.nan, 0.0]]), spec, _eos(40.0))


# -- single-step behaviour -----------------------------------------------------

def _single(g=G, vel=(0.0, 0.0)):
    sys_ = ParticleSystem.from_arrays(np.array([[0.5, 1.0]]), vel=np.array([vel]), dp=0.01)
    st = SimulationState(sys_, [], None)
    return Simulation(st, SolverSetup(KernelSpec(0.01), _eos(40.0), g=g))


def test_zero_force_fixed_point():
    sim = _single(g=0.0)
    before = snapshot(sim.state)
    sim.step(1e-4)
    after = sim.state
    s0 = restore(before)
    np.testing.assert_array_equal(after.system.pos, s0.system.pos)
    np.testing.assert_array_equal(after.system.vel, s0.system.vel)
    np.testing.assert_array_equal(after.system.rho, s0.system.rho)


def test_single_particle_follows_parabola():
    v0 = (0.3, 1.0)
    sim = _single(vel=v0)
    for _ in range(1000):
        symplectic_step(sim, 1e-4)
    t = sim.state.t
    assert t == pytest.approx(0.1, rel=1e-12)
    x, z = sim.state.system.pos[0]
    assert x == pytest.approx(0.5 + v0[0] * t, abs=1e-12)
    assert z == pytest.approx(1.0 + v0[1] * t - 0.5 * G * t * t, abs=1e-10)


def test_fixed_step_above_bound_is_refused():
    sim = _single()
    with pytest.raises(ValueError):
        sim.step(1.0)


def test_run_until_lands_on_target():
    sim = _single()
    sim.run_until(0.00123)
    assert sim.state.t == pytest.approx(0.00123, abs=1e-15)


# -- snapshot / restore ----------------------------------------------------------

@pytest.fixture(scope="module")
def small_tank():
    spec = TankSpec(length=1.5, depth=0.3, dp=0.03, piston=False, bodies=(BodySpec(x=0.75, kp=300.0),))
    tank = build_tank(spec, skin=0.0075)
    sim = Simulation(tank.state, tank.setup)
    sim.run_until(0.1)
    return sim


def test_snapshot_round_trip_is_byte_identical(small_tank):
    blob = small_tank.snapshot()
    assert snapshot(restore(blob, like=small_tank.state)) == blob


def test_snapshot_preserves_rng(small_tank):
    blob = small_tank.snapshot()
    a = restore(blob).rng.standard_normal(5)
    b = restore(blob).rng.standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_restore_refuses_mismatched_state(small_tank):
    blob = small_tank.snapshot()
    other = build_tank(TankSpec(length=1.0, depth=0.3, dp=0.03, piston=False)).state
    with pytest.raises(ValueError):
        restore(blob, like=other)


def test_restore_refuses_foreign_or_versioned_bytes(small_tank):
    blob = bytearray(small_tank.snapshot())
    with pytest.raises(ValueError):
        restore(b"NOTASNAP" + bytes(blob[8:]))
    blob[8] ^= 0xFF  # version field follows the 8-byte magic
    with pytest.raises(ValueError):
        restore(bytes(blob))


def test_continuations_from_snapshot_are_bitwise_identical(small_tank):
    blob = small_tank.snapshot()
    t0 = small_tank.state.t
    runs = []
    for _ in range(2):
        small_tank.restore(blob)
        small_tank.run_until(t0 + 0.3)
        runs.append(small_tank.snapshot())
    assert runs[0] == runs[1]
    assert runs[0] != blob


def test_step_then_restore_then_step_identical(small_tank):
    blob = small_tank.snapshot()
    small_tank.step()
    a = small_tank.snapshot()
    small_tank.restore(blob)
    small_tank.step()
    assert small_tank.snapshot() == a


def test_verlet_skin_does_not_change_trajectory():
    spec = TankSpec(length=1.0, depth=0.3, dp=0.03, piston=False)
    out = []
    for skin in (0.0, 0.0075):
        tank = build_tank(spec, skin=skin)
        sim = Simulation(tank.state, tank.setup)
        sim.run_until(0.05)
        out.append(sim.snapshot())
    assert out[0] == out[1]


# -- still water -----------------------------------------------------------------

def test_still_water_surface_is_quiet(still_water):
    assert np.max(np.abs(still_water["eta"])) < 0.5 * still_water["dp"]


def test_still_water_energy_does_not_grow(still_water):
    E = still_water["E"]
    assert still_water["steps"] > 1e4
    assert np.max(E - E[0]) <= 1e-9 * abs(E[0])


def test_still_water_relaxes_to_equilibrium(still_water):
    assert np.max(still_water["acc"]) <= 0.02 * still_water["g"]


def test_wall_pressure_matches_hydrostatics(still_water):
    p = still_water["wall_p"]
    ref = still_water["rho0"] * still_water["g"] * still_water["depth"]
    assert p.size >= 1
    np.testing.assert_allclose(p, ref, rtol=0.05)


# -- orchestration ---------------------------------------------------------------

def test_zero_duration_run_writes_headers_only(tmp_path):
    cfg = tiny_config(tmp_path)
    out = run_simulation(cfg, str(tmp_path), t_end=0.0)
    assert out.t.size == 0
    with open(out.files["gauges"]) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    assert rows == [["t", *out.gauge_names]]


def test_identical_runs_write_identical_files(tmp_path):
    files = []
    for _ in range(2):
        cfg = tiny_config(tmp_path)
        out = run_simulation(cfg, str(tmp_path), seed=3, t_end=0.1)
        files.append({n: open(p, "rb").read() for n, p in out.files.items() if n != "runtime"})
    assert files[0] == files[1]


def test_fixed_dt_regression_mode(tmp_path):
    cfg = tiny_config()
    out = run_simulation(cfg, None, fixed_dt=2e-4, t_end=0.1)
    np.testing.assert_allclose(out.t, [0.0, 0.05, 0.1], atol=1e-12)
    with pytest.raises(ValueError):
        run_simulation(cfg, None, fixed_dt=0.05, t_end=0.1)


def test_particle_frame_columns(tmp_path):
    sys_ = ParticleSystem.from_arrays(np.array([[0.1, 0.2], [0.3, 0.4]]), dp=0.01)
    p = tmp_path / "f.csv"
    write_particle_frame(p, sys_)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["id", "kind", "x", "z", "vx", "vz", "rho", "p"]
    assert float(rows[2][2]) == 0.3 and len(rows) == 3
