"""Quasi-static equilibrium and stick-slip friction of the tendon arm.

Section bending moments are 2-vectors in the local bending basis, ordered
(sin, cos): component conjugate to theta*sin(phi) first, to theta*cos(phi)
second.  A single tendon with tension F at azimuth phi_j then contributes
F * R_T * (sin(phi_j), cos(phi_j)), and the per-section balance

    M_tendon + M_load + M_gravity + M_elastic = 0

is the stationarity condition of the total potential in the Cartesian
bending coordinates.  Gravity and load moments are exact configuration
gradients, so converged equilibria coincide with potential-energy minima.

Friction acts per tendon channel: the required holding force is compared
against the current-dependent static limit; channels over the limit slip
with a first-order relaxation rate.  Bowden routing decouples sections, so
a tendon loads only its destination section.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .kinematics import (
    ArmConfig,
    ArmGeometry,
    N_SECTIONS,
    N_TENDONS,
    TENDONS_PER_SECTION,
    TendonLayout,
    config_from_tendons,
    point_kinematics_from_bends,
    tendon_lengths,
)

log = logging.getLogger(__name__)

MOMENT_TOL = 1e-8          # N*m, per-section residual norm
MAX_ITERATIONS = 200
DEFAULT_MOBILITY = 0.005   # m/(N*s), slip relaxation rate per unit force excess

STUCK = "stuck"
SLIPPING = "slipping"

# Slip rates below this are numerically stationary: the channel re-sticks
# instead of creeping forever toward the friction boundary.
VELOCITY_FLOOR = 1e-12  # m/s

StiffnessHook = Callable[[ArmConfig], np.ndarray]


@dataclass(frozen=True)
class FrictionParams:
    """Coefficients of the channel force balance and friction laws.

    mu_static/mu_kinetic weight the static and kinetic friction; alpha and
    beta are the tension/actuation mixing weights (0.5 each by default).
    Actuation force is k_act * I + c_act; the current-form kinetic friction
    uses k_kf * I + c_kf, derived from the other coefficients when omitted.
    """

    mu_static: float = 0.3
    mu_kinetic: float = 0.2
    alpha: float = 0.5
    beta: float = 0.5
    k_act: float = 20.0
    c_act: float = 0.5
    k_kf: float | None = None
    c_kf: float | None = None

    def __post_init__(self):
        if not self.mu_static >= self.mu_kinetic >= 0.0:
            raise ValueError("need mu_static >= mu_kinetic >= 0")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.k_act > 0.0:
            raise ValueError("k_act must be positive")
        if self.c_act < 0.0:
            raise ValueError("c_act must be non-negative")
        if self.k_kf is None:
            object.__setattr__(self, "k_kf", self.mu_kinetic * self.k_act)
        if self.c_kf is None:
            object.__setattr__(self, "c_kf", self.mu_kinetic * self.c_act)
        if self.k_kf < 0.0 or self.c_kf < 0.0:
            raise ValueError("k_kf and c_kf must be non-negative")


@dataclass(frozen=True)
class TendonChannelState:
    """Per-tendon bookkeeping: tension, current, velocity, regime, displacement."""

    tension: float = 0.0
    current: float = 0.0
    velocity: float = 0.0
    regime: str = STUCK
    displacement: float = 0.0

    def __post_init__(self):
        if self.tension < 0.0:
            raise ValueError("a tendon cannot push: tension must be >= 0")
        if self.current < 0.0:
            raise ValueError("motor current must be >= 0")
        expected = STUCK if self.velocity == 0.0 else SLIPPING
        if self.regime != expected:
            raise ValueError(f"regime {self.regime!r} inconsistent with velocity {self.velocity}")


@dataclass(frozen=True)
class ExternalLoad:
    """Point force (N, base frame) applied at arc-length coordinate s (m)."""

    s: float
    force: tuple[float, float, float]

    def force_array(self) -> np.ndarray:
        return np.asarray(self.force, dtype=float)


@dataclass(frozen=True)
class EquilibriumResult:
    config: ArmConfig
    residual_norms: np.ndarray        # (3,) per-section moment norm, N*m
    tensions: np.ndarray              # (9,)
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ArmState:
    """One arm's configuration plus its nine tendon channel states."""

    config: ArmConfig
    channels: tuple[TendonChannelState, ...]

    def __post_init__(self):
        if len(self.channels) != N_TENDONS:
            raise ValueError("an arm state carries exactly 9 tendon channels")

    def displacements(self) -> np.ndarray:
        return np.array([c.displacement for c in self.channels])

    def tensions(self) -> np.ndarray:
        return np.array([c.tension for c in self.channels])


class HoldReport(NamedTuple):
    held: bool
    margins: np.ndarray  # (3,) per-section moment margin, N*m


class TensionDistribution(NamedTuple):
    tensions: np.ndarray  # (9,) >= 0
    slack: np.ndarray     # (9,) bool, channels clamped at zero tension


# ---------------------------------------------------------------------------
# channel force laws

def actuation_force(current: float, p: FrictionParams) -> float:
    """Motor channel force k_act * I + c_act (N)."""
    if current < 0.0:
        raise ValueError("current must be non-negative")
    return p.k_act * current + p.c_act


def static_friction_limit(tension: float, act: float, p: FrictionParams) -> float:
    """Maximum static friction force mu_s * (alpha*F_T + beta*F_act)."""
    if tension < 0.0 or act < 0.0:
        raise ValueError("channel forces must be non-negative")
    return p.mu_static * (p.alpha * tension + p.beta * act)


def kinetic_friction(tension: float, act: float, velocity: float, p: FrictionParams) -> float:
    """Kinetic friction mu_k * (F_T + F_act) carrying the sign of the velocity.

    The caller subtracts it as a resistance.  Zero velocity is the static
    regime and a contract violation here.
    """
    if velocity == 0.0:
        raise ValueError("kinetic friction undefined at zero velocity; use the static regime")
    if tension < 0.0 or act < 0.0:
        raise ValueError("channel forces must be non-negative")
    return p.mu_kinetic * (tension + act) * math.copysign(1.0, velocity)


def kinetic_friction_from_current(current: float, velocity: float, p: FrictionParams) -> float:
    """Current-form kinetic friction (k_kf * I + c_kf) * sign(velocity)."""
    if velocity == 0.0:
        raise ValueError("kinetic friction undefined at zero velocity")
    if current < 0.0:
        raise ValueError("current must be non-negative")
    return (p.k_kf * current + p.c_kf) * math.copysign(1.0, velocity)


# ---------------------------------------------------------------------------
# section moments (bending basis, (sin, cos) component order)

def _moment_matrix(layout: TendonLayout, section: int) -> np.ndarray:
    """2x3 map from the section's tendon tensions to its bending moment."""
    az = layout.azimuth_array()[section]
    r = layout.radius_array()[section]
    return r * np.vstack([np.sin(az), np.cos(az)])


def tendon_moment(config: ArmConfig, tensions, layout: TendonLayout) -> np.ndarray:
    """Per-section bending moment of the tendon tensions, (3, 2).

    Bowden tubes decouple sections: each section is loaded only by its own
    three tendons.  For the straight-routed tendon map the result does not
    depend on the configuration.
    """
    tensions = np.asarray(tensions, dtype=float).reshape(N_SECTIONS, TENDONS_PER_SECTION)
    if np.any(tensions < 0.0):
        raise ValueError("tendon tensions must be non-negative")
    moments = np.zeros((N_SECTIONS, 2))
    for i in range(N_SECTIONS):
        moments[i] = _moment_matrix(layout, i) @ tensions[i]
    return moments


def _mass_points(geom: ArmGeometry):
    """Lumped masses: one per section midpoint plus an optional tip mass."""
    points = [(i, geom.section_lengths[i] / 2.0) for i in range(N_SECTIONS)]
    masses = list(geom.section_masses)
    if geom.tip_mass > 0.0:
        points.append((N_SECTIONS - 1, geom.section_lengths[-1]))
        masses.append(geom.tip_mass)
    return points, np.asarray(masses)


def _to_moments(generalized: np.ndarray) -> np.ndarray:
    """Reorder a (6,) bend-coordinate generalized force into (3, 2) moments."""
    return generalized.reshape(N_SECTIONS, 2)[:, ::-1]


def _gravity_from_bends(bends: np.ndarray, geom: ArmGeometry) -> np.ndarray:
    points, masses = _mass_points(geom)
    if masses.size == 0 or not masses.any():
        return np.zeros((N_SECTIONS, 2))
    _, jac = point_kinematics_from_bends(bends, geom.section_lengths, points)
    g = geom.gravity_array()
    generalized = np.einsum("m,mic,i->c", masses, jac, g)
    return _to_moments(generalized)


def gravity_moment(config: ArmConfig, geom: ArmGeometry) -> np.ndarray:
    """Per-section gravity moment, (3, 2).

    Exact configuration gradient of the gravitational potential of the
    lumped masses, so equilibria agree with potential-energy minima.
    """
    return _gravity_from_bends(config.bend_vector().reshape(N_SECTIONS, 2), geom)


def _load_from_bends(bends: np.ndarray, loads: Sequence[ExternalLoad], geom: ArmGeometry) -> np.ndarray:
    if not loads:
        return np.zeros((N_SECTIONS, 2))
    lengths = geom.length_array()
    bounds = np.concatenate([[0.0], np.cumsum(lengths)])
    points = []
    for load in loads:
        if not 0.0 <= load.s <= bounds[-1] * (1.0 + 1e-12):
            raise ValueError(f"load point s={load.s} outside the arm")
        k = min(int(np.searchsorted(bounds[1:], load.s, side="left")), N_SECTIONS - 1)
        points.append((k, min(load.s - bounds[k], lengths[k])))
    _, jac = point_kinematics_from_bends(bends, geom.section_lengths, points)
    generalized = np.zeros(2 * N_SECTIONS)
    for m, load in enumerate(loads):
        generalized += jac[m].T @ load.force_array()
    return _to_moments(generalized)


def load_moment(config: ArmConfig, loads: Sequence[ExternalLoad], geom: ArmGeometry) -> np.ndarray:
    """Per-section moment of external point loads, (3, 2): exact gradient form."""
    return _load_from_bends(config.bend_vector().reshape(N_SECTIONS, 2), loads, geom)


def _elastic_from_bends(bends: np.ndarray, geom: ArmGeometry) -> np.ndarray:
    k = np.asarray(geom.bend_stiffness)
    return -k[:, None] * bends[:, ::-1]


def elastic_moment(config: ArmConfig, geom: ArmGeometry) -> np.ndarray:
    """Linear restoring moment, magnitude k_bend * theta opposing the bend."""
    return _elastic_from_bends(config.bend_vector().reshape(N_SECTIONS, 2), geom)


# ---------------------------------------------------------------------------
# tension distribution

def tension_distribution(
    demand: np.ndarray,
    layout: TendonLayout,
    actuation: np.ndarray,
    pretension: str = "track",
) -> TensionDistribution:
    """Tendon tensions producing the demanded per-section moments.

    The per-section balance leaves one pretension degree of freedom along
    (1, 1, 1).  "track" centers the tensions on the section's actuation
    forces (what current-controlled motors enforce); "least" uses the
    smallest admissible pretension.  Negative-tension demands are clamped by
    raising the pretension, keeping the balance intact; channels left at
    zero are flagged slack.
    """
    demand = np.asarray(demand, dtype=float).reshape(N_SECTIONS, 2)
    actuation = np.asarray(actuation, dtype=float).reshape(N_SECTIONS, TENDONS_PER_SECTION)
    tensions = np.zeros((N_SECTIONS, TENDONS_PER_SECTION))
    for i in range(N_SECTIONS):
        M = _moment_matrix(layout, i)
        particular = M.T @ np.linalg.solve(M @ M.T, demand[i])  # zero-mean solution
        if pretension == "track":
            level = float(actuation[i].mean())
        elif pretension == "least":
            level = -float(particular.min())
        else:
            raise ValueError(f"unknown pretension rule {pretension!r}")
        level = max(level, -float(particular.min()), 0.0)
        tensions[i] = particular + level
    tensions = tensions.reshape(N_TENDONS)
    slack = tensions <= 1e-12
    return TensionDistribution(np.maximum(tensions, 0.0), slack)


# ---------------------------------------------------------------------------
# equilibrium solve

def _net_moment_from_bends(
    bends: np.ndarray,
    loads: Sequence[ExternalLoad],
    geom: ArmGeometry,
    stiffness_hook: StiffnessHook | None,
) -> np.ndarray:
    """Sum of all non-tendon moments at raw bend coordinates, (3, 2).

    Works on unsnapped coordinates so the solver keeps bend directions below
    THETA_EPS; only the stiffness hook sees an ArmConfig, whose added moment
    vanishes with theta anyway.
    """
    total = _gravity_from_bends(bends, geom) + _elastic_from_bends(bends, geom)
    if loads:
        total = total + _load_from_bends(bends, loads, geom)
    if stiffness_hook is not None:
        total = total + np.asarray(stiffness_hook(ArmConfig.from_bend_vector(bends)), dtype=float)
    return total


def _net_moment(
    config: ArmConfig,
    loads: Sequence[ExternalLoad],
    geom: ArmGeometry,
    stiffness_hook: StiffnessHook | None,
) -> np.ndarray:
    """Sum of all non-tendon moments at a configuration, (3, 2)."""
    return _net_moment_from_bends(
        config.bend_vector().reshape(N_SECTIONS, 2), loads, geom, stiffness_hook
    )


def solve_equilibrium(
    loads: Sequence[ExternalLoad],
    channels: Sequence[TendonChannelState],
    geom: ArmGeometry,
    layout: TendonLayout,
    stiffness_hook: StiffnessHook | None = None,
    tol: float = MOMENT_TOL,
    max_iter: int = MAX_ITERATIONS,
    initial: ArmConfig | None = None,
) -> EquilibriumResult:
    """Damped Newton solve of the per-section moment balance.

    Iterates in the Cartesian bending coordinates, which subsume the
    azimuth-singular region near straight sections.  Non-convergence within
    max_iter returns the best iterate with converged=False.  Per-iteration
    diagnostics stream as one JSON object per log line.
    """
    tensions = np.array([c.tension for c in channels], dtype=float)
    fixed = tendon_moment(initial if initial is not None else ArmConfig.straight(),
                          tensions, layout)

    def residual(w: np.ndarray) -> np.ndarray:
        bends = w.reshape(N_SECTIONS, 2)
        return (fixed + _net_moment_from_bends(bends, loads, geom, stiffness_hook)).reshape(6)

    def section_norms(r: np.ndarray) -> np.ndarray:
        return np.linalg.norm(r.reshape(N_SECTIONS, 2), axis=1)

    def newton(w0: np.ndarray):
        w = w0.copy()
        r = residual(w)
        best_w, best_norm = w.copy(), float(section_norms(r).max())
        step = 1e-7
        used = 0
        for used in range(1, max_iter + 1):
            worst = float(section_norms(r).max())
            if worst <= tol:
                return w, used - 1, True, best_w, best_norm
            J = np.zeros((6, 6))
            for col in range(6):
                hi, lo = w.copy(), w.copy()
                hi[col] += step
                lo[col] -= step
                J[:, col] = (residual(hi) - residual(lo)) / (2.0 * step)
            try:
                delta = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(J, -r, rcond=None)[0]
            damping = 1.0
            base = float(np.linalg.norm(r))
            for _ in range(40):
                r_trial = residual(w + damping * delta)
                if np.linalg.norm(r_trial) < base:
                    break
                damping *= 0.5
            w = w + damping * delta
            r = residual(w)
            worst = float(section_norms(r).max())
            if worst < best_norm:
                best_w, best_norm = w.copy(), worst
            if log.isEnabledFor(logging.DEBUG):
                log.debug(json.dumps({"iteration": used, "residual": worst,
                                      "damping": damping}))
        worst = float(section_norms(r).max())
        if worst <= tol:
            return w, max_iter, True, best_w, best_norm
        return best_w, max_iter, False, best_w, best_norm

    # primary start, then deterministic fallback seeds for hard load cases
    starts = [initial.bend_vector() if initial is not None else np.zeros(6)]
    for theta0 in (0.4, 1.0):
        for phi0 in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
            seed = np.tile([theta0 * math.cos(phi0), theta0 * math.sin(phi0)], N_SECTIONS)
            starts.append(seed)

    total_iterations = 0
    overall_w, overall_norm = starts[0], math.inf
    converged = False
    for w0 in starts:
        w, used, ok, best_w, best_norm = newton(w0)
        total_iterations += used
        if best_norm < overall_norm:
            overall_w, overall_norm = best_w, best_norm
        if ok:
            overall_w = w
            converged = True
            break

    r = residual(overall_w)
    norms = section_norms(r)
    return EquilibriumResult(
        config=ArmConfig.from_bend_vector(overall_w),
        residual_norms=norms,
        tensions=tensions,
        iterations=total_iterations,
        converged=bool(converged and norms.max() <= tol),
    )


# ---------------------------------------------------------------------------
# back-drivable stepping and configuration holding

def rest_state(
    geom: ArmGeometry,
    layout: TendonLayout,
    p: FrictionParams,
    currents,
    config: ArmConfig | None = None,
    stiffness_hook: StiffnessHook | None = None,
) -> ArmState:
    """Arm state at a configuration with channel bookkeeping pre-filled."""
    config = config if config is not None else ArmConfig.straight()
    currents = np.asarray(currents, dtype=float)
    acts = p.k_act * currents + p.c_act
    demand = -_net_moment(config, (), geom, stiffness_hook)
    tensions, _ = tension_distribution(demand, layout, acts, "track")
    dl = tendon_lengths(config, layout)
    channels = tuple(
        TendonChannelState(tension=float(tensions[j]), current=float(currents[j]),
                           displacement=float(dl[j]))
        for j in range(N_TENDONS)
    )
    return ArmState(config=config, channels=channels)


def backdrive_step(
    state: ArmState,
    loads: Sequence[ExternalLoad],
    currents,
    dt: float,
    geom: ArmGeometry,
    layout: TendonLayout,
    p: FrictionParams,
    mobility: float = DEFAULT_MOBILITY,
    stiffness_hook: StiffnessHook | None = None,
) -> ArmState:
    """Advance the back-drivable arm one step under external loads.

    Per channel, the net force (demanded tension minus actuation) is tested
    against the static friction limit; channels within the limit stay stuck,
    channels beyond it slip with velocity proportional to the excess over
    kinetic friction.  The configuration follows from the perception map on
    the integrated displacements, so stuck channels hold their component of
    the configuration exactly.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1] seconds")
    currents = np.asarray(currents, dtype=float)
    if currents.shape != (N_TENDONS,):
        raise ValueError("expected 9 channel currents")
    acts = p.k_act * currents + p.c_act

    demand = -_net_moment(state.config, loads, geom, stiffness_hook)
    tensions, _ = tension_distribution(demand, layout, acts, "track")

    net = tensions - acts
    limits = p.mu_static * (p.alpha * tensions + p.beta * acts)
    kinetic = p.mu_kinetic * (tensions + acts)
    slipping = np.abs(net) > limits
    excess = np.maximum(np.abs(net) - kinetic, 0.0)
    velocities = np.where(slipping, mobility * np.sign(net) * excess, 0.0)
    velocities[np.abs(velocities) < VELOCITY_FLOOR] = 0.0

    if not np.any(velocities != 0.0):
        channels = tuple(
            replace(state.channels[j], tension=float(tensions[j]),
                    current=float(currents[j]), velocity=0.0, regime=STUCK)
            for j in range(N_TENDONS)
        )
        return ArmState(config=state.config, channels=channels)

    dl = state.displacements() + velocities * dt
    config, _ = config_from_tendons(dl, layout)
    clamped = [s.theta > geom.theta_max for s in config.sections]
    if any(clamped):
        sections = tuple(
            replace(s, theta=min(s.theta, geom.theta_max)) for s in config.sections
        )
        config = ArmConfig(sections)
        # anti-windup: re-anchor displacements to the clamped configuration,
        # keeping each section's pretension (mean) component
        means = dl.reshape(N_SECTIONS, 3).mean(axis=1)
        dl = tendon_lengths(config, layout) + np.repeat(means, TENDONS_PER_SECTION)

    channels = tuple(
        TendonChannelState(
            tension=float(tensions[j]),
            current=float(currents[j]),
            velocity=float(velocities[j]),
            regime=SLIPPING if velocities[j] != 0.0 else STUCK,
            displacement=float(dl[j]),
        )
        for j in range(N_TENDONS)
    )
    return ArmState(config=config, channels=channels)


def hold_check(
    config: ArmConfig,
    currents,
    geom: ArmGeometry,
    layout: TendonLayout,
    p: FrictionParams,
) -> HoldReport:
    """Can friction and actuation hold this configuration unaided?

    The gravity + elastic moment fixes the required tensions (least
    admissible pretension, independent of the currents); each channel must
    cover the part of its required tension the motor does not supply within
    the static friction limit.  Margins are per-section moment reserves.
    """
    currents = np.asarray(currents, dtype=float)
    if currents.shape != (N_TENDONS,):
        raise ValueError("expected 9 channel currents")
    acts = p.k_act * currents + p.c_act
    demand = -(gravity_moment(config, geom) + elastic_moment(config, geom))
    required, _ = tension_distribution(demand, layout, acts, "least")
    need = np.maximum(required - acts, 0.0)
    limits = p.mu_static * (p.alpha * required + p.beta * acts)
    margin_per_channel = (limits - need).reshape(N_SECTIONS, TENDONS_PER_SECTION)
    radii = layout.radius_array()
    margins = radii * margin_per_channel.min(axis=1)
    return HoldReport(held=bool(np.all(margin_per_channel >= 0.0)), margins=margins)
