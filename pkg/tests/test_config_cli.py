"""Configuration schema, command-line entry points and post-processing."""
import math
import os

import numpy as np
import pytest

from conftest import tiny_config
from wecsph import __version__
from wecsph.analysis import EnergyReport, RunTimer, read_csv, runtime_report, spectral_analysis, write_csv
from wecsph.cli import cmd_eval, cmd_sweep, cmd_train, main
from wecsph.config import ConfigError, paper_default, parse_config


# -- configuration ---------------------------------------------------------------------

def test_empty_document_gives_paper_defaults():
    cfg = parse_config(text="")
    assert cfg == paper_default()
    assert (cfg.tank.length, cfg.tank.depth, cfg.bodies.diameter, cfg.bodies.height,
            cfg.waves.H, cfg.waves.T) == (12.0, 1.1, 0.5, 0.22, 0.16, 1.5)
    assert cfg.bodies.spacing == 1.0 and cfg.bodies.k_base == 700.0


def test_negative_depth_names_the_key():
    with pytest.raises(ConfigError, match=r"tank\.depth"):
        parse_config(text="tank:\n  depth: -1.0\n")


@pytest.mark.parametrize("text, key", [
    ("tank:\n  depht: 1.0\n", "tank.depht"),
    ("tanks:\n  depth: 1.0\n", "tanks"),
    ("rl:\n  gamma: 1.5\n", "rl.gamma"),
    ("waves:\n  kind: swell\n", "waves.kind"),
    ("rl:\n  batch_size: 12.5\n", "rl.batch_size"),
    ("tank: [1, 2]\n", "tank"),
])
def test_schema_violations_are_named(text, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config(text=text)


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        parse_config(text="tank: {depth: [\n")


def test_round_trip_is_identical():
    cfg = parse_config(text="tank:\n  dp: 0.025\nrl:\n  hidden: [32, 16]\nbodies:\n  count: 3\n")
    again = parse_config(text=cfg.dump())
    assert again == cfg and again.hash() == cfg.hash()


def test_three_dimensional_defaults():
    cfg = paper_default(3)
    assert cfg.tank.dim == 3 and cfg.bodies.count == 3 and cfg.waves.kind == "irregular"
    assert (cfg.episodes.T_e, cfg.episodes.t_e, cfg.episodes.N_e) == (20.0, 10.0, 50)


# -- analysis --------------------------------------------------------------------------

def test_sinusoid_spectrum():
    A, f0, dt = 0.08, 0.5, 0.05
    t = np.arange(0, 400, dt)
    sp = spectral_analysis(A * np.sin(2 * math.pi * f0 * t), dt)
    assert sp.Hs == pytest.approx(4 * A / math.sqrt(2), rel=0.02)
    df = sp.f[1] - sp.f[0]
    assert abs(1 / sp.Tp - f0) <= df


def test_white_noise_variance(rng):
    sigma = 0.3
    sp = spectral_analysis(rng.normal(0, sigma, 200_000), 0.1)
    assert sp.m0 == pytest.approx(sigma ** 2, rel=0.05)


def test_short_series_rejected():
    with pytest.raises(ValueError):
        spectral_analysis(np.zeros(100), 0.1)
    with pytest.raises(ValueError):
        spectral_analysis(np.full(600, np.nan), 0.1)


def test_energy_report_totals():
    rep = EnergyReport([10.0, 12.5, 7.25], [9.0, 13.0, 7.0])
    rows = rep.rows()
    assert rows[-1]["E_drl"] == sum(r["E_drl"] for r in rows[:-1])
    assert rows[-1]["E_0"] == sum(r["E_0"] for r in rows[:-1])
    assert rows[-1]["dE"] == pytest.approx(sum(r["dE"] for r in rows[:-1]), rel=1e-15)
    assert rows[0]["improvement_pct"] == pytest.approx(100 / 9)
    with pytest.raises(ValueError):
        EnergyReport([1.0], [1.0, 2.0])


def test_label_swap_negates_energy_gain():
    a, b = np.array([10.0, 12.5]), np.array([9.0, 13.0])
    fwd, rev = EnergyReport(a, b), EnergyReport(b, a)
    np.testing.assert_array_equal(rev.delta, -fwd.delta)
    # the percentages are relative to different baselines, so they flip sign but are not mirror images
    assert np.all(np.sign(rev.improvement) == -np.sign(fwd.improvement))


def test_runtime_report_accounting():
    timer = RunTimer()
    timer.add("sph", 3.0)
    timer.add("io", 0.5)
    rep = runtime_report(timer, 1234, total=4.0)
    assert rep["rl_share"] == 0.0 and rep["n_particles"] == 1234
    assert rep["other"] == pytest.approx(0.5)
    assert sum(rep[f"{k}_share"] for k in ("sph", "rl", "io", "other")) == pytest.approx(1.0, abs=0.01)


def test_csv_round_trip_and_header(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, ["t", "v"], [[0.1, 1 / 3], [0.2, np.float64(2 / 3)]], "abc", 7)
    first = open(p, encoding="utf-8").readline()
    assert first == f"# wecsph {__version__} config=abc seed=7\n"
    cols, data = read_csv(p)
    assert cols == ["t", "v"] and data[0, 1] == 1 / 3 and data[1, 1] == 2 / 3
    with pytest.raises(FileNotFoundError):
        read_csv(tmp_path / "nope.csv")


# -- command line ----------------------------------------------------------------------

def _write_cfg(cfg, tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(cfg.dump())
    return str(p)


def _header(path):
    return open(path, encoding="utf-8").readline()


def test_cli_simulate_writes_headed_csv(tmp_path, capsys):
    cfg = tiny_config(tmp_path / "out")
    path = _write_cfg(cfg, tmp_path)
    assert main(["simulate", "--config", path, "--seed", "4"]) == 0
    out = tmp_path / "out"
    resolved = parse_config(out / "config.resolved.yaml")
    for name in ("gauges.csv", "body0.csv", "runtime.csv"):
        assert _header(out / name) == f"# wecsph {__version__} config={resolved.hash()} seed=4\n"
    cols, data = read_csv(out / "gauges.csv")
    assert cols[0] == "t" and data.shape[0] == 7
    cols, data = read_csv(out / "body0.csv")
    assert cols == ["t", "dz", "vz", "az", "kp", "F_pto", "P", "E"]
    assert np.all(np.diff(data[:, -1]) >= 0)


def test_cli_missing_checkpoint(tmp_path, capsys):
    path = _write_cfg(tiny_config(tmp_path / "out"), tmp_path)
    assert main(["eval", "--config", path, "--checkpoint", str(tmp_path / "none.bin")]) == 2
    assert "checkpoint not found" in capsys.readouterr().err


def test_cli_rejects_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("tank:\n  depth: -2\n")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "tank.depth" in capsys.readouterr().err


def test_cli_analyze(tmp_path, capsys):
    dt = 0.05
    t = np.arange(0, 100, dt)
    p = tmp_path / "gauges.csv"
    write_csv(p, ["t", "g0"], np.column_stack([t, 0.05 * np.sin(2 * math.pi / 1.5 * t)]).tolist())
    assert main(["analyze", str(p)]) == 0
    assert "g0: Hs=" in capsys.readouterr().out
    assert open(tmp_path / "stats.csv").read().splitlines()[1].startswith("gauge,Hs,Tp")
    cols, data = read_csv(tmp_path / "spectrum.csv")
    assert cols == ["f", "g0"] and data.shape[0] == 257
    short = tmp_path / "short.csv"
    write_csv(short, ["t", "g0"], [[0.0, 0.0], [0.1, 0.0]])
    assert main(["analyze", str(short)]) == 2


def test_sweep_writes_one_row_per_damping(tmp_path):
    cfg = tiny_config(tmp_path)
    cfg.sweep.t_end, cfg.sweep.window = 0.3, 0.2
    rows = cmd_sweep(cfg, [200.0, 900.0])
    assert rows.shape == (2, 3) and np.all(rows[:, 1] >= 0)
    cols, data = read_csv(tmp_path / "sweep.csv")
    assert cols == ["kp", "P0", "P_total"]
    np.testing.assert_array_equal(data, rows)


def test_untrained_policy_matches_baseline(tmp_path):
    cfg = tiny_config(tmp_path)
    cfg.episodes.N_e = 0
    ck = cmd_train(cfg, seed=0)
    rep = cmd_eval(cfg, ck, seed=0)
    assert abs(rep.rows()[-1]["improvement_pct"]) < 2.0
    assert _header(tmp_path / "energy_report.csv").startswith("# wecsph")


def test_training_is_deterministic(tmp_path):
    blobs, logs = [], []
    for k in range(2):
        cfg = tiny_config(tmp_path)
        ck = cmd_train(cfg, seed=3)
        blobs.append(open(ck, "rb").read())
        logs.append(open(tmp_path / "training_log.csv", "rb").read())
        assert os.path.exists(tmp_path / "checkpoint_ep0004.bin")
    assert blobs[0] == blobs[1]
    assert logs[0] == logs[1]
