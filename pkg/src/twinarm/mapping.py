"""Demonstrator-to-executor mapping: tendon scaling, stiffness profiles,
executor tracking and deviation metrics.

Scaling tendon displacements by the executor/demonstrator length ratio
preserves the per-section (theta, phi) when the executor's geometry (arc
lengths and pitch radii) carries the same ratio.  Stiffness profiles assign
a Low/High current and a virtual restoring stiffness per section; both
channels are kept separate so experiments can isolate friction effects from
moment feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kinematics import ArmConfig, N_SECTIONS, N_TENDONS, TENDONS_PER_SECTION

PROFILE_NAMES = tuple(a + b + c for a in "LH" for b in "LH" for c in "LH")


@dataclass(frozen=True)
class ScaleMapping:
    """Executor length / demonstrator length ratio (X = 1 is identity).

    A per-section override exists for non-uniformly scaled executors (the
    large arm's conical base suggests the pitch radii need not scale with
    one global factor).
    """

    factor: float = 1.0
    per_section: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not self.factor > 0.0:
            raise ValueError("scale factor must be positive")
        if self.per_section is not None:
            if len(self.per_section) != N_SECTIONS:
                raise ValueError("per-section scaling needs 3 factors")
            if any(not f > 0.0 for f in self.per_section):
                raise ValueError("per-section factors must be positive")

    def section_factors(self) -> np.ndarray:
        if self.per_section is not None:
            return np.asarray(self.per_section, dtype=float)
        return np.full(N_SECTIONS, self.factor)


def map_tendons(tendons, mapping: ScaleMapping) -> np.ndarray:
    """Scale demonstrator tendon displacements for the executor."""
    dl = np.asarray(tendons, dtype=float).reshape(N_SECTIONS, TENDONS_PER_SECTION)
    return (dl * mapping.section_factors()[:, None]).reshape(N_TENDONS)


@dataclass(frozen=True)
class StiffnessProfile:
    """Per-section Low/High setting, named base-to-tip (LLL ... HHH)."""

    levels: str = "LLL"
    current_low: float = 0.1    # A
    current_high: float = 0.6   # A
    k_stiff_low: float = 0.0    # N*m/rad
    k_stiff_high: float = 0.8   # N*m/rad

    def __post_init__(self):
        if self.levels not in PROFILE_NAMES:
            raise ValueError(f"profile name must be one of {PROFILE_NAMES}, got {self.levels!r}")
        if not self.current_high > self.current_low >= 0.0:
            raise ValueError("need current_high > current_low >= 0")
        if not self.k_stiff_high > self.k_stiff_low >= 0.0:
            raise ValueError("need k_stiff_high > k_stiff_low >= 0")

    def with_levels(self, levels: str) -> "StiffnessProfile":
        return StiffnessProfile(levels, self.current_low, self.current_high,
                                self.k_stiff_low, self.k_stiff_high)

    def section_currents(self) -> np.ndarray:
        return np.array([
            self.current_high if level == "H" else self.current_low
            for level in self.levels
        ])

    def stiffness_gains(self) -> np.ndarray:
        return np.array([
            self.k_stiff_high if level == "H" else self.k_stiff_low
            for level in self.levels
        ])


def apply_stiffness_profile(profile: StiffnessProfile) -> np.ndarray:
    """Channel currents (9,): all three tendons of a section share its level."""
    return np.repeat(profile.section_currents(), TENDONS_PER_SECTION)


def stiffness_moment(config: ArmConfig, profile: StiffnessProfile) -> np.ndarray:
    """Profile-induced restoring moment, magnitude k_stiff * theta per section.

    Same bending-basis layout as the statics moments; pass as the stiffness
    hook of the equilibrium solver.
    """
    gains = profile.stiffness_gains()
    w = config.bend_vector().reshape(N_SECTIONS, 2)
    return -gains[:, None] * w[:, ::-1]


@dataclass(frozen=True)
class TrackingParams:
    """Executor deviation model: backlash deadband, rate limit, first-order lag."""

    hysteresis: float = 0.002   # m
    rate_limit: float = 0.05    # m/s
    time_constant: float = 0.05  # s

    def __post_init__(self):
        if self.hysteresis < 0.0:
            raise ValueError("hysteresis must be >= 0")
        if not self.rate_limit > 0.0:
            raise ValueError("rate limit must be positive")
        if self.time_constant < 0.0:
            raise ValueError("time constant must be >= 0")


def executor_track(commanded, current, tp: TrackingParams, dt: float) -> np.ndarray:
    """Advance the executor tendons one step toward the commanded vector.

    No motion inside the (inclusive) deadband; outside it, a first-order
    approach to commanded -/+ hysteresis, rate-clamped.  The exact
    exponential update is used so the discrete response matches the
    continuous first-order solution at the sample times and never
    overshoots the deadband edge.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    commanded = np.asarray(commanded, dtype=float)
    current = np.asarray(current, dtype=float)
    error = commanded - current
    active = np.abs(error) > tp.hysteresis
    target = current + np.where(active, error - np.sign(error) * tp.hysteresis, 0.0)
    if tp.time_constant > 0.0:
        step = (target - current) * (1.0 - math.exp(-dt / tp.time_constant))
    else:
        step = target - current
    bound = tp.rate_limit * dt
    return current + np.clip(step, -bound, bound)


class DeviationReport(NamedTuple):
    """Per-axis deviation: percent of demonstrator range, or absolute RMS (m)
    where the demonstrator range is zero (flagged)."""

    percent: np.ndarray        # (3,), nan on flagged axes
    rms: np.ndarray            # (3,), meters
    zero_range: np.ndarray     # (3,) bool


def deviation_metrics(demo_times, demo_positions, exec_times, exec_positions) -> DeviationReport:
    """Per-axis relative deviation between two tip-position series.

    Both series are linearly resampled onto a common uniform grid covering
    the overlapping time window, at the slower series' rate; deviation is
    RMS(difference) / demonstrator range * 100 per axis.
    """
    dt_times = np.asarray(demo_times, dtype=float)
    ex_times = np.asarray(exec_times, dtype=float)
    dt_pos = np.asarray(demo_positions, dtype=float).reshape(len(dt_times), 3)
    ex_pos = np.asarray(exec_positions, dtype=float).reshape(len(ex_times), 3)
    if dt_times.size == 0 or ex_times.size == 0:
        raise ValueError("series must be non-empty")
    start = max(dt_times[0], ex_times[0])
    stop = min(dt_times[-1], ex_times[-1])
    if not stop >= start:
        raise ValueError("series do not overlap in time")

    def rate(times):
        if times.size < 2 or times[-1] == times[0]:
            return math.inf
        return (times.size - 1) / (times[-1] - times[0])

    slower = min(rate(dt_times), rate(ex_times))
    if math.isinf(slower) or stop == start:
        grid = np.array([start])
    else:
        n = max(int(math.floor((stop - start) * slower)) + 1, 2)
        grid = np.linspace(start, stop, n)

    demo_r = np.column_stack([np.interp(grid, dt_times, dt_pos[:, k]) for k in range(3)])
    exec_r = np.column_stack([np.interp(grid, ex_times, ex_pos[:, k]) for k in range(3)])
    diff = demo_r - exec_r
    rms = np.sqrt(np.mean(diff * diff, axis=0))
    span = demo_r.max(axis=0) - demo_r.min(axis=0)
    zero_range = span == 0.0
    percent = np.where(zero_range, np.nan, rms / np.where(zero_range, 1.0, span) * 100.0)
    return DeviationReport(percent=percent, rms=rms, zero_range=zero_range)
