import json
import math
import os

import numpy.testing as npt
import pytest

from twinarm.cli import main
from twinarm.config import ConfigError, TwinConfig, load_config
from twinarm.experiments import (
    LoadScript,
    generate_load_path,
    run_gap_scenario,
    run_stiffness_experiment,
    run_trajectory_experiment,
    write_metrics_table,
)
from twinarm.mapping import StiffnessProfile, TrackingParams
from twinarm.statics import ExternalLoad


def fast_cfg(**overrides):
    cfg = TwinConfig()
    cfg.experiment.load_period = overrides.pop("load_period", 4.0)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


# ---------------------------------------------------------------------------
# load paths

def test_circle_phase_convention():
    script = LoadScript("circle", amplitude=2.0, period=8.0, s=0.6)
    load = generate_load_path(script, 0.0)
    npt.assert_allclose(load.force, (2.0, 0.0, 0.0), atol=1e-15)
    quarter = generate_load_path(script, 2.0)
    npt.assert_allclose(quarter.force, (0.0, 2.0, 0.0), atol=1e-12)


def test_square_visits_corners_equally_spaced():
    script = LoadScript("square", amplitude=1.0, period=8.0, s=0.6)
    corners = set()
    for k in range(4):
        load = generate_load_path(script, k * 2.0)
        corners.add((round(load.force[0], 12), round(load.force[1], 12)))
    expected = {
        (round(math.cos(a), 12), round(math.sin(a), 12))
        for a in (math.radians(d) for d in (45.0, 135.0, 225.0, 315.0))
    }
    assert corners == expected


def _segments(points):
    return list(zip(points[:-1], points[1:]))


def _proper_intersection(a, b, c, d):
    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    d1, d2 = cross(a, b, c), cross(a, b, d)
    d3, d4 = cross(c, d, a), cross(c, d, b)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def test_star_path_has_five_crossings():
    script = LoadScript("star", amplitude=1.0, period=5.0, s=0.6)
    # sample one corner point per edge traversal plus the closing point
    points = []
    for k in range(6):
        load = generate_load_path(script, (k % 5) * 1.0)
        points.append((load.force[0], load.force[1]))
    segments = _segments(points)
    crossings = 0
    for i in range(len(segments)):
        for j in range(i + 1, len(segments)):
            if _proper_intersection(*segments[i], *segments[j]):
                crossings += 1
    assert crossings == 5


def test_sweep_paths():
    lateral = LoadScript("lateral-sweep", amplitude=1.5, period=4.0, s=0.6)
    npt.assert_allclose(generate_load_path(lateral, 1.0).force, (1.5, 0.0, 0.0), atol=1e-12)
    rot = LoadScript("rotation-sweep", amplitude=1.0, period=4.0, s=0.6)
    early = generate_load_path(rot, 0.5)   # first half: second-axis lobes
    late = generate_load_path(rot, 2.5)    # second half: first-axis lobes
    assert abs(early.force[1]) > 0.9 and early.force[0] == 0.0
    assert abs(late.force[0]) > 0.9 and late.force[1] == 0.0


def test_load_script_validation():
    with pytest.raises(ValueError):
        LoadScript("hexagon", amplitude=1.0, period=1.0, s=0.6)
    with pytest.raises(ValueError):
        LoadScript("circle", amplitude=0.0, period=1.0, s=0.6)
    with pytest.raises(ValueError):
        LoadScript("circle", amplitude=1.0, period=-2.0, s=0.6)
    script = LoadScript("circle", amplitude=1.0, period=1.0, s=0.6)
    with pytest.raises(ValueError):
        generate_load_path(script, -0.1)


# ---------------------------------------------------------------------------
# trajectory experiment

def test_ideal_tracking_zero_deviation():
    cfg = fast_cfg(tracking=TrackingParams(hysteresis=0.0, rate_limit=1e9, time_constant=0.0))
    result = run_trajectory_experiment("circle", cfg, duration=4.0)
    npt.assert_allclose(result.deviation.percent, 0.0, atol=0.0)


def test_default_tracking_deviation_in_band():
    result = run_trajectory_experiment("circle", fast_cfg(), duration=8.0)
    for value in result.deviation.percent:
        assert 0.0 < value <= 20.0


def test_experiment_outputs_are_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cfg = fast_cfg()
    run_trajectory_experiment("circle", cfg, duration=2.0, out_dir=str(out1))
    run_trajectory_experiment("circle", cfg, duration=2.0, out_dir=str(out2))
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_four_shapes_emit_table_rows(tmp_path):
    cfg = fast_cfg()
    rows = []
    for shape in ("circle", "square", "triangle", "star"):
        result = run_trajectory_experiment(shape, cfg, duration=1.0)
        rows.append((shape, result.deviation))
    path = tmp_path / "metrics.csv"
    write_metrics_table(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "shape,x_pct,y_pct,z_pct"
    assert [line.split(",")[0] for line in lines[1:]] == ["circle", "square", "triangle", "star"]
    assert len(lines) == 5


# ---------------------------------------------------------------------------
# stiffness experiment

def test_stiffness_experiment_orderings():
    cfg = TwinConfig()
    load = ExternalLoad(s=0.6, force=(0.8, 0.0, 0.0))
    profiles = [StiffnessProfile(levels) for levels in ("LLL", "LHH", "HLL", "HHH")]
    results = {r.profile: r for r in run_stiffness_experiment(load, profiles, cfg)}
    assert all(r.converged for r in results.values())
    assert results["HHH"].tip_displacement < results["LLL"].tip_displacement
    assert results["HLL"].thetas[0] < results["LHH"].thetas[0]


def test_stiffness_experiment_zero_load_straight():
    cfg = TwinConfig()
    geometry = cfg.geometry
    load = ExternalLoad(s=0.6, force=(0.0, 0.0, 0.0))
    profiles = [StiffnessProfile(levels) for levels in ("LLL", "HHH")]
    results = run_stiffness_experiment(load, profiles, cfg)
    for r in results:
        npt.assert_allclose(r.thetas, 0.0, atol=1e-9)
    npt.assert_allclose(results[0].tip, results[1].tip, atol=1e-9)
    with pytest.raises(ValueError):
        run_stiffness_experiment(load, profiles[:1], cfg)


# ---------------------------------------------------------------------------
# gap scenario

def test_gap_scenario_schedule(tmp_path):
    cfg = fast_cfg()
    log = run_gap_scenario(cfg, out_dir=str(tmp_path))
    assert log.profile_sequence() == ["LLL", "LHH", "HLL", "LLL"]
    assert [p.duration for p in log.phases] == [15.0, 2.0, 10.0, 5.0]
    assert log.total_duration == pytest.approx(32.0, abs=1.0 / cfg.rate_hz)
    assert len(log.frames) == int(32.0 * cfg.rate_hz)
    phases_csv = (tmp_path / "gap_phases.csv").read_text().splitlines()
    assert [line.split(",")[1] for line in phases_csv[1:]] == ["LLL", "LHH", "HLL", "LLL"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["total_duration_s"] == pytest.approx(32.0)


# ---------------------------------------------------------------------------
# config file

CONFIG_TEXT = """
[geometry]
section_lengths = 0.2, 0.2, 0.2
gravity = 0, 0, -9.81
theta_max_deg = 90

[layout]
section2_azimuths_deg = 30, 150, 270

[friction]
mu_static = 0.4
mu_kinetic = 0.25
mobility = 0.002

[session]
rate_hz = 50
scale = 1.6333
profile = LHH

[experiment]
load_amplitude = 1.0
seed = 7
"""


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "twin.ini"
    path.write_text(CONFIG_TEXT)
    cfg = load_config(str(path))
    assert cfg.geometry.theta_max == pytest.approx(math.pi / 2)
    assert cfg.geometry.layout.azimuths[1][0] == pytest.approx(math.radians(30.0))
    assert cfg.friction.mu_static == 0.4
    assert cfg.mobility == 0.002
    assert cfg.rate_hz == 50.0
    assert cfg.scale.factor == pytest.approx(1.6333)
    assert cfg.profile.levels == "LHH"
    assert cfg.experiment.load_amplitude == 1.0
    assert cfg.experiment.seed == 7
    # executor geometry scales lengths and pitch radii
    ex = cfg.executor_geometry()
    assert ex.total_length == pytest.approx(0.6 * 1.6333)
    assert ex.layout.pitch_radii[0] == pytest.approx(0.02 * 1.6333)


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/twin.ini")


def test_load_config_invalid_values(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[friction]\nmu_static = 0.1\nmu_kinetic = 0.5\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("[geometry]\nsection_lengths = 0.2, 0.2\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


# ---------------------------------------------------------------------------
# CLI

def test_cli_experiment_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["experiment", "--shape", "circle", "--duration", "1.0",
                 "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "deviation" in captured.out
    assert (out / "manifest.json").exists()
    assert (out / "metrics.csv").exists()


def test_cli_validation_error_exit_code(tmp_path, capsys):
    code = main(["experiment", "--duration", "-5", "--out", str(tmp_path / "x")])
    assert code == 2
    code = main(["--config", "/does/not/exist.ini", "gap-demo"])
    assert code == 2


def test_cli_replay_roundtrip(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["experiment", "--shape", "circle", "--duration", "1.0",
                 "--out", str(out)]) == 0
    trace = out / "circle_demo_frames.csv"
    exec_out = tmp_path / "exec.csv"
    code = main(["replay", str(trace), "--scale", "1.6333", "--out", str(exec_out)])
    assert code == 0
    assert exec_out.exists()


def test_cli_replay_transport_error(tmp_path):
    out = tmp_path / "run"
    assert main(["experiment", "--shape", "circle", "--duration", "1.0",
                 "--out", str(out)]) == 0
    trace = out / "circle_demo_frames.csv"
    code = main(["replay", str(trace), "--endpoint", "tcp://127.0.0.1:1"])
    assert code == 3


def test_cli_unknown_shape_rejected():
    with pytest.raises(SystemExit) as err:
        main(["experiment", "--shape", "blob", "--out", "/tmp/x"])
    assert err.value.code == 2
