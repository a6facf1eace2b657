"""Observation/action/reward bridge, episode lifecycle and the toy oscillator."""
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tiny_config
from wecsph.cli import make_env
from wecsph.env.coupling import (ActionMapping, EpisodeConfig, RewardSpec, compute_rewards,
                                 episode_loop, interpolate_kp, map_action)
from wecsph.env.toy import ToyEnv, ToyParams, ToyState, toy_env_step, toy_optimal_damping, toy_steady_power
from wecsph.rl.masac import Masac, MasacConfig
from wecsph.sph.particles import Kind

# -- action mapping ----------------------------------------------------------------

def test_action_mapping_examples():
    m = ActionMapping(k_base=700.0)
    assert map_action(0.0, m) == 700.0
    assert map_action(1.0, m) == pytest.approx(1330.0)
    assert map_action(-1.0, m) == pytest.approx(70.0)


def test_action_outside_range_is_clamped_and_logged(caplog):
    m = ActionMapping(k_base=700.0)
    with caplog.at_level(logging.WARNING):
        assert map_action(1.7, m) == pytest.approx(1330.0)
    assert "clamped" in caplog.text


@given(st.floats(-5, 5), st.floats(1, 5000))
def test_mapped_damping_within_band(o, kb):
    kp = map_action(o, ActionMapping(k_base=kb))
    assert 0.1 * kb * (1 - 1e-12) <= kp <= 1.9 * kb * (1 + 1e-12)


def test_mapping_validation():
    with pytest.raises(ValueError):
        ActionMapping(k_base=0.0)
    with pytest.raises(ValueError):
        ActionMapping(dk_frac=1.0)


def test_interpolation_examples():
    assert interpolate_kp(2.0, 100.0, 300.0, 2.0, 2.1) == 100.0
    assert interpolate_kp(2.05, 100.0, 300.0, 2.0, 2.1) == pytest.approx(200.0)
    assert interpolate_kp(2.1, 100.0, 300.0, 2.0, 2.1) == 300.0
    assert interpolate_kp(2.07, 250.0, 250.0, 2.0, 2.1) == 250.0
    with pytest.raises(ValueError):
        interpolate_kp(0.0, 1.0, 2.0, 1.0, 1.0)


# -- rewards ---------------------------------------------------------------------------

def test_reward_example():
    np.testing.assert_allclose(compute_rewards([10.0, 0.0], RewardSpec(0.7)), [6.5, 3.5])


@given(st.floats(0, 1), st.floats(0, 1e4))
def test_single_agent_reward_is_power(gp, P):
    assert compute_rewards([P], RewardSpec(gp))[0] == pytest.approx(P, rel=1e-15, abs=1e-300)


@settings(max_examples=200)
@given(st.floats(0, 1), st.lists(st.floats(0, 1e4), min_size=1, max_size=5))
def test_reward_sum_equals_power_sum(gp, P):
    r = compute_rewards(P, RewardSpec(gp))
    assert math.fsum(r) == pytest.approx(math.fsum(P), rel=1e-12, abs=1e-9)


def test_reward_validation():
    with pytest.raises(ValueError):
        compute_rewards([1.0, -0.1])
    with pytest.raises(ValueError):
        RewardSpec(1.5)


def test_episode_defaults():
    assert EpisodeConfig.paper_default(2) == EpisodeConfig(10.0, 10.0, 100)
    e3 = EpisodeConfig.paper_default(3)
    assert (e3.T_e, e3.t_e, e3.N_e) == (20.0, 10.0, 50)
    ep, m = EpisodeConfig(), ActionMapping()
    assert int(round(ep.T_e / m.dt_ctrl)) == 100


# -- SPH environment ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def env():
    e = make_env(tiny_config(), seed=0)
    return e


def test_still_water_observation_is_zero(env):
    # fresh tank at t = 0: body at rest, undisturbed surface
    obs = env.extract_observation(0)
    assert obs.shape == (11,)
    assert np.all(np.abs(obs[:4]) < 0.5 * env.sim.setup.kernel.dp)
    assert np.all(obs[4:] == 0.0)


def test_raised_column_observation():
    e = make_env(tiny_config(), seed=0)
    s = e.sim.state.system
    delta = 0.03
    f = s.kind == Kind.FLUID
    s.pos[f, -1] += delta
    b = e.sim.state.bodies[0]
    b.R0[-1] += delta
    b.sync_particles(s)
    obs = e.extract_observation(0)
    np.testing.assert_allclose(obs[:4], delta, atol=0.5 * e.sim.setup.kernel.dp)
    assert obs[9] == pytest.approx(delta)


def test_backward_difference_rate_amplitude(env):
    A, T, dt = 0.05, 1.5, env.mapping.dt_ctrl
    w = 2 * math.pi / T
    t = np.arange(0, 3 * T, dt)
    rates = []
    for k in range(1, t.size):
        eta = np.full((1, 4), A * math.sin(w * t[k]))
        prev = np.full((1, 4), A * math.sin(w * t[k - 1]))
        rates.append(env.extract_observation(0, eta, prev)[4])
    assert max(np.abs(rates)) == pytest.approx(w * A, rel=0.05)


def test_non_finite_observation_raises(env):
    with pytest.raises(FloatingPointError):
        env.extract_observation(0, np.full((1, 4), np.nan), np.zeros((1, 4)))


def test_gauge_count_enforced(env):
    with pytest.raises(ValueError):
        type(env)(env.sim, [env.gauges[0][:3]], env.mapping, env.episode)


def test_resets_restore_the_snapshot_bitwise(env):
    env.reset()
    assert env.sim.snapshot() == env.snap
    rng = np.random.default_rng(0)
    n = 0
    done = False
    while not done:
        _, r, done, info = env.step(rng.uniform(-1, 1, (1, 1)))
        n += 1
        assert np.all(r >= 0) and np.all(info["power"] >= 0)
    assert n == env.n_steps == 5
    assert env.sim.snapshot() != env.snap
    env.reset()
    assert env.sim.snapshot() == env.snap


def test_damping_is_continuous_and_bounded(env):
    kps, dts = [], []
    env.reset()
    sim = env.sim
    rng = np.random.default_rng(1)
    original = sim.run_until

    def spy(t_end, cb=None, **kw):
        def rec(s):
            kps.append(s.state.bodies[0].kp)
            dts.append(s.last_dt)
            if cb is not None:
                cb(s)
        return original(t_end, rec, **kw)

    sim.run_until = spy
    try:
        targets = []
        done = False
        while not done:
            _, _, done, info = env.step(np.array([[rng.choice([-1.0, 1.0])]]))
            targets.append(info["kp"][0])
    finally:
        sim.run_until = original
    kb = env.mapping.k_base
    kps = np.array(kps)
    assert np.all(kps >= 0.1 * kb - 1e-9) and np.all(kps <= 1.9 * kb + 1e-9)
    # a ramp across a control interval moves at most |dkp| * dt / dt_ctrl per SPH step
    bound = 1.8 * kb * max(dts) / env.mapping.dt_ctrl
    assert np.max(np.abs(np.diff(kps))) <= bound * (1 + 1e-9)


def test_zero_episodes_leave_snapshot_untouched(env):
    env.reset()
    snap = env.snap
    m = Masac(MasacConfig(n_agents=1, obs_dim=11, hidden=(4,), batch_size=2, n_min=2), seed=0)
    assert episode_loop(env, m, 0) == []
    assert env.snap is snap and len(m.buffer) == 0


def test_episode_loop_stores_one_transition_per_interval(env):
    m = Masac(MasacConfig(n_agents=1, obs_dim=11, hidden=(4,), batch_size=2, n_min=2), seed=0)
    rows = episode_loop(env, m, 2, warmup_episodes=1)
    assert len(m.buffer) == 2 * env.n_steps
    assert [r["episode"] for r in rows] == [0, 1]
    assert m.buffer.d[env.n_steps - 1] == 1.0 and m.buffer.d[0] == 0.0


# -- toy oscillator ------------------------------------------------------------------------

def test_toy_optimum_examples():
    assert toy_optimal_damping(1, 4, 0.5, 1) == pytest.approx(math.sqrt(9.25), rel=1e-15)
    assert toy_optimal_damping(1, 4, 0.5, 1) == pytest.approx(3.041, abs=5e-4)
    assert toy_optimal_damping(2.0, 8.0, 0.3, 2.0) == pytest.approx(0.3, rel=1e-15)
    with pytest.raises(ValueError):
        toy_optimal_damping(1, 4, 0.0, 1)


def _simulated_power(kp, periods=40, substeps=400):
    p = ToyParams()
    dt = 2 * math.pi / p.omega / substeps
    s = ToyState()
    acc = []
    for k in range(periods * substeps):
        s, pw = toy_env_step(s, kp, dt, p)
        if k >= (periods // 2) * substeps:
            acc.append(pw)
    return float(np.mean(acc))


def test_simulated_power_matches_steady_state_formula():
    for kp in (1.0, 3.0, 6.0):
        assert _simulated_power(kp) == pytest.approx(toy_steady_power(kp), rel=0.02)


def test_power_at_optimum_beats_neighbours():
    ks = toy_optimal_damping(1, 4, 0.5, 1)
    P = _simulated_power(ks)
    assert P > _simulated_power(0.5 * ks) and P > _simulated_power(2.0 * ks)


def test_grid_argmax_brackets_optimum():
    env = ToyEnv()
    m = env.mapping
    grid = np.linspace(-1, 1, 50)
    P = [env.average_power(lambda o, a=a: np.array([[a]])) for a in grid]
    kps = [map_action(a, m) for a in grid]
    k = int(np.argmax(P))
    assert kps[max(k - 1, 0)] <= toy_optimal_damping(1, 4, 0.5, 1) <= kps[min(k + 1, 49)]


def test_toy_episode_shape():
    env = ToyEnv()
    obs = env.reset()
    assert obs.shape == (1, 2) and np.all(obs == 0)
    n = 0
    done = False
    while not done:
        obs, r, done, info = env.step(np.zeros((1, 1)))
        n += 1
    assert n == env.horizon and info["kp"][0] == env.mapping.k_base
