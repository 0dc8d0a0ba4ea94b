"""Headless experiment driver: scripted load paths, trajectory and stiffness
experiments, the narrow-gap scenario, and plot-ready CSV emission.

Everything here is deterministic given (config, seed): re-running an
experiment produces byte-identical output files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import TwinConfig
from .kinematics import ArmConfig, config_from_tendons, forward_kinematics
from .mapping import (
    DeviationReport,
    StiffnessProfile,
    apply_stiffness_profile,
    deviation_metrics,
    stiffness_moment,
)
from .protocol import TendonFrame, record_trace
from .session import SessionConfig, SessionStats, run_session
from .statics import ExternalLoad, backdrive_step, rest_state, solve_equilibrium, TendonChannelState

SHAPES = ("circle", "square", "triangle", "star", "lateral-sweep", "rotation-sweep")

_POLYGON_VERTICES = {
    # unit-circle inscribed, traversed corner to corner at constant speed
    "square": [(math.cos(a), math.sin(a)) for a in
               (math.radians(d) for d in (45.0, 135.0, 225.0, 315.0))],
    "triangle": [(math.cos(a), math.sin(a)) for a in
                 (math.radians(d) for d in (90.0, 210.0, 330.0))],
    # five-pointed star: {5/2} vertex order 0, 2, 4, 1, 3
    "star": [(math.cos(math.radians(90.0 + 72.0 * k)), math.sin(math.radians(90.0 + 72.0 * k)))
             for k in (0, 2, 4, 1, 3)],
}


@dataclass(frozen=True)
class LoadScript:
    """Periodic load path tracing a shape in a force plane."""

    shape: str
    amplitude: float            # N, peak force
    period: float               # s
    s: float                    # application point, arc length from base
    plane: tuple[tuple[float, float, float], tuple[float, float, float]] = (
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
    )

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.amplitude > 0.0:
            raise ValueError("amplitude must be positive")
        if not self.period > 0.0:
            raise ValueError("period must be positive")


def _shape_uv(shape: str, phase: float) -> tuple[float, float]:
    """Unit-scale planar point of the shape at phase in [0, 1)."""
    if shape == "circle":
        return math.cos(2.0 * math.pi * phase), math.sin(2.0 * math.pi * phase)
    if shape == "lateral-sweep":
        return math.sin(2.0 * math.pi * phase), 0.0
    if shape == "rotation-sweep":
        # up/down lobes on the second axis first, then left/right lobes
        lobe = math.sin(4.0 * math.pi * phase)
        return (0.0, lobe) if phase < 0.5 else (lobe, 0.0)
    vertices = _POLYGON_VERTICES[shape]
    n = len(vertices)
    u = phase * n
    i = int(u) % n
    frac = u - int(u)
    x0, y0 = vertices[i]
    x1, y1 = vertices[(i + 1) % n]
    return x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)


def generate_load_path(script: LoadScript, t: float) -> ExternalLoad:
    """Continuous periodic load vector tracing the script's shape."""
    if t < 0.0:
        raise ValueError("time must be non-negative")
    phase = (t / script.period) % 1.0
    u, v = _shape_uv(script.shape, phase)
    e1 = np.asarray(script.plane[0], dtype=float)
    e2 = np.asarray(script.plane[1], dtype=float)
    force = script.amplitude * (u * e1 + v * e2)
    return ExternalLoad(s=script.s, force=tuple(force))


# ---------------------------------------------------------------------------
# trajectory experiments

@dataclass
class TipSeries:
    times: np.ndarray       # (N,) seconds
    positions: np.ndarray   # (N, 3) meters


@dataclass
class TrajectoryResult:
    shape: str
    deviation: DeviationReport
    stats: SessionStats
    demo_frames: list[TendonFrame]
    exec_frames: list[TendonFrame]
    demo_tips: TipSeries
    exec_tips: TipSeries
    outputs: list[str] = field(default_factory=list)


def _tips_from_frames(frames: Sequence[TendonFrame], geom) -> TipSeries:
    times = np.array([f.t_us / 1e6 for f in frames])
    tips = np.zeros((len(frames), 3))
    for i, frame in enumerate(frames):
        config, _ = config_from_tendons(np.asarray(frame.displacements), geom.layout)
        tips[i] = forward_kinematics(config, geom).tip_position
    return TipSeries(times=times, positions=tips)


def simulate_demonstrator(cfg: TwinConfig, script: LoadScript, duration: float) -> list[TendonFrame]:
    """Drive the back-drivable demonstrator under the load script and sample
    tendon frames at the session rate."""
    geom = cfg.geometry
    currents = apply_stiffness_profile(cfg.profile)
    hook = lambda c: stiffness_moment(c, cfg.profile)
    state = rest_state(geom, geom.layout, cfg.friction, currents, stiffness_hook=hook)
    dt = 1.0 / cfg.rate_hz
    period_us = int(round(1e6 / cfg.rate_hz))
    frames = []
    n = int(round(duration * cfg.rate_hz))
    for k in range(n):
        load = generate_load_path(script, k * dt)
        state = backdrive_step(state, [load], currents, dt, geom, geom.layout,
                               cfg.friction, mobility=cfg.mobility, stiffness_hook=hook)
        frames.append(TendonFrame(
            seq=k,
            t_us=k * period_us,
            displacements=tuple(state.displacements()),
            currents=tuple(currents),
        ))
    return frames


def run_trajectory_experiment(
    shape: str,
    cfg: TwinConfig,
    duration: float,
    out_dir: str | None = None,
) -> TrajectoryResult:
    """End-to-end teleoperation run: demonstrator under the shape's load
    script, loopback session to the executor, per-axis deviation metrics.

    With a non-unit scale the demonstrator tips are scaled by X before
    comparison, so deviations measure mapping fidelity, not size.
    """
    script = LoadScript(
        shape=shape,
        amplitude=cfg.experiment.load_amplitude,
        period=cfg.experiment.load_period,
        s=cfg.geometry.total_length,
    )
    demo_frames = simulate_demonstrator(cfg, script, duration)
    exec_frames: list[TendonFrame] = []
    session_cfg = SessionConfig(rate_hz=cfg.rate_hz, scale=cfg.scale,
                                profile=cfg.profile, tracking=cfg.tracking)
    stats = run_session(iter(demo_frames), exec_frames.append, session_cfg)

    demo_tips = _tips_from_frames(demo_frames, cfg.geometry)
    exec_tips = _tips_from_frames(exec_frames, cfg.executor_geometry())
    scaled_demo = TipSeries(times=demo_tips.times,
                            positions=demo_tips.positions * cfg.scale.factor)
    deviation = deviation_metrics(scaled_demo.times, scaled_demo.positions,
                                  exec_tips.times, exec_tips.positions)
    result = TrajectoryResult(
        shape=shape, deviation=deviation, stats=stats,
        demo_frames=demo_frames, exec_frames=exec_frames,
        demo_tips=scaled_demo, exec_tips=exec_tips,
    )
    if out_dir is not None:
        result.outputs = _write_trajectory_outputs(result, cfg, duration, out_dir)
    return result


def _write_tip_csv(path: str, tips: TipSeries) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t_s,x,y,z\n")
        for t, (x, y, z) in zip(tips.times, tips.positions):
            fh.write(f"{t:.9g},{x:.9g},{y:.9g},{z:.9g}\n")


def format_metric(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.3g}"


def write_metrics_table(path: str, rows: Sequence[tuple[str, DeviationReport]]) -> None:
    """Deviation table, one row per shape, columns ordered x, y, z percent."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("shape,x_pct,y_pct,z_pct\n")
        for shape, report in rows:
            cells = ",".join(format_metric(v) for v in report.percent)
            fh.write(f"{shape},{cells}\n")


def _write_trajectory_outputs(result: TrajectoryResult, cfg: TwinConfig,
                              duration: float, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    prefix = result.shape.replace("-", "_")
    outputs = []

    def emit(name, writer):
        path = os.path.join(out_dir, name)
        writer(path)
        outputs.append(name)

    emit(f"{prefix}_demo_frames.csv", lambda p: record_trace(result.demo_frames, p))
    emit(f"{prefix}_exec_frames.csv", lambda p: record_trace(result.exec_frames, p))
    emit(f"{prefix}_demo_tip.csv", lambda p: _write_tip_csv(p, result.demo_tips))
    emit(f"{prefix}_exec_tip.csv", lambda p: _write_tip_csv(p, result.exec_tips))
    emit("metrics.csv", lambda p: write_metrics_table(p, [(result.shape, result.deviation)]))

    manifest = {
        "experiment": "trajectory",
        "shape": result.shape,
        "duration_s": duration,
        "rate_hz": cfg.rate_hz,
        "scale": cfg.scale.factor,
        "profile": cfg.profile.levels,
        "seed": cfg.experiment.seed,
        "load_amplitude_n": cfg.experiment.load_amplitude,
        "load_period_s": cfg.experiment.load_period,
        "deviation_pct": [None if math.isnan(v) else round(float(v), 6)
                          for v in result.deviation.percent],
        "frames_delivered": result.stats.delivered,
        "frames_dropped": result.stats.dropped,
        "outputs": sorted(outputs + ["manifest.json"]),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append("manifest.json")
    return outputs


# ---------------------------------------------------------------------------
# stiffness distribution experiment

@dataclass
class StiffnessResult:
    profile: str
    thetas: np.ndarray
    tip: np.ndarray
    tip_displacement: float
    converged: bool


def run_stiffness_experiment(
    load: ExternalLoad,
    profiles: Sequence[StiffnessProfile],
    cfg: TwinConfig,
) -> list[StiffnessResult]:
    """Equilibrium under one fixed load for each stiffness profile."""
    if len(profiles) < 2:
        raise ValueError("need at least 2 profiles to compare")
    geom = cfg.geometry
    rest_tip = forward_kinematics(ArmConfig.straight(), geom).tip_position
    channels = tuple(TendonChannelState() for _ in range(9))
    results = []
    for profile in profiles:
        solved = solve_equilibrium(
            [load], channels, geom, geom.layout,
            stiffness_hook=lambda c, pr=profile: stiffness_moment(c, pr),
        )
        tip = forward_kinematics(solved.config, geom).tip_position
        results.append(StiffnessResult(
            profile=profile.levels,
            thetas=solved.config.thetas(),
            tip=tip,
            tip_displacement=float(np.linalg.norm(tip - rest_tip)),
            converged=solved.converged,
        ))
    return results


# ---------------------------------------------------------------------------
# narrow-gap scenario

GAP_PHASES = (
    # name, duration (s), profile, load shape
    ("entry", 15.0, "LLL", "lateral-sweep"),
    ("lateral-search", 2.0, "LHH", "lateral-sweep"),
    ("rotational-search", 10.0, "HLL", "rotation-sweep"),
    ("retraction", 5.0, "LLL", "lateral-sweep"),
)


@dataclass
class PhaseRecord:
    name: str
    profile: str
    t_start: float
    duration: float
    tip_start: np.ndarray
    tip_end: np.ndarray


@dataclass
class GapLog:
    phases: list[PhaseRecord]
    frames: list[TendonFrame]
    total_duration: float

    def profile_sequence(self) -> list[str]:
        return [p.profile for p in self.phases]


def run_gap_scenario(cfg: TwinConfig, out_dir: str | None = None) -> GapLog:
    """Four-phase narrow-gap pass with the scheduled stiffness profiles.

    The schedule LLL -> LHH -> HLL -> LLL with durations 15/2/10/5 s is
    asserted as it executes; the log records profile switches and tip poses.
    """
    geom = cfg.geometry
    dt = 1.0 / cfg.rate_hz
    period_us = int(round(1e6 / cfg.rate_hz))
    state = None
    frames: list[TendonFrame] = []
    phases: list[PhaseRecord] = []
    expected = [phase[2] for phase in GAP_PHASES]
    t_start = 0.0
    k = 0
    for (name, duration, levels, shape), want in zip(GAP_PHASES, expected):
        if levels != want:
            raise RuntimeError(f"stiffness schedule violated: {levels} != {want}")
        profile = cfg.profile.with_levels(levels)
        currents = apply_stiffness_profile(profile)
        hook = lambda c, pr=profile: stiffness_moment(c, pr)
        if state is None:
            state = rest_state(geom, geom.layout, cfg.friction, currents, stiffness_hook=hook)
        script = LoadScript(shape=shape, amplitude=cfg.experiment.load_amplitude,
                            period=max(duration, 1e-9), s=geom.total_length)
        tip_start = forward_kinematics(state.config, geom).tip_position
        steps = int(round(duration * cfg.rate_hz))
        for i in range(steps):
            load = generate_load_path(script, i * dt)
            state = backdrive_step(state, [load], currents, dt, geom, geom.layout,
                                   cfg.friction, mobility=cfg.mobility, stiffness_hook=hook)
            frames.append(TendonFrame(
                seq=k, t_us=k * period_us,
                displacements=tuple(state.displacements()),
                currents=tuple(currents),
            ))
            k += 1
        tip_end = forward_kinematics(state.config, geom).tip_position
        phases.append(PhaseRecord(name=name, profile=levels, t_start=t_start,
                                  duration=duration, tip_start=tip_start, tip_end=tip_end))
        t_start += duration

    log = GapLog(phases=phases, frames=frames, total_duration=t_start)
    if out_dir is not None:
        _write_gap_outputs(log, cfg, out_dir)
    return log


def _write_gap_outputs(log: GapLog, cfg: TwinConfig, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    record_trace(log.frames, os.path.join(out_dir, "gap_frames.csv"))
    with open(os.path.join(out_dir, "gap_phases.csv"), "w", encoding="ascii", newline="\n") as fh:
        fh.write("phase,profile,t_start_s,duration_s,tip_x_end,tip_y_end,tip_z_end\n")
        for p in log.phases:
            fh.write(f"{p.name},{p.profile},{p.t_start:.9g},{p.duration:.9g},"
                     f"{p.tip_end[0]:.9g},{p.tip_end[1]:.9g},{p.tip_end[2]:.9g}\n")
    manifest = {
        "experiment": "gap-demo",
        "phases": [{"name": p.name, "profile": p.profile, "duration_s": p.duration}
                   for p in log.phases],
        "total_duration_s": log.total_duration,
        "rate_hz": cfg.rate_hz,
        "seed": cfg.experiment.seed,
        "outputs": ["gap_frames.csv", "gap_phases.csv", "manifest.json"],
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
