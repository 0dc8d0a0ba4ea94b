"""Piecewise-constant-curvature kinematics of a 3-section tendon-driven arm.

Each section is an inextensible circular arc of fixed length, described by a
bend angle theta >= 0 and a bending-plane azimuth phi.  Internally most math
runs in the Cartesian bending coordinates

    w = (theta * cos(phi), theta * sin(phi))

which stay smooth through theta = 0 where the azimuth is undefined.  Bending
at phi = 0 curls the section toward local +x; straight sections translate
along local +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_SECTIONS = 3
TENDONS_PER_SECTION = 3
N_TENDONS = N_SECTIONS * TENDONS_PER_SECTION

# Below this bend angle the azimuth is canonically zero.
THETA_EPS = 1e-9

# Switch to series expansions of the arc coefficients to avoid cancellation.
_SERIES_THETA = 1e-2

_TAU = 2.0 * math.pi

# Maps bend coordinates w = (a, b) to the rotation vector (-b, a, 0).
_AXIS_FROM_W = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 0.0]])


# ---------------------------------------------------------------------------
# smooth arc coefficients (valid for scalars and ndarrays)

def _arc_f(theta):
    """(1 - cos t) / t^2."""
    t2 = np.square(theta)
    small = t2 < _SERIES_THETA**2
    safe = np.where(small, 1.0, theta)
    direct = (1.0 - np.cos(safe)) / np.square(safe)
    series = 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2 * t2 * t2 / 40320.0
    return np.where(small, series, direct)


def _arc_g(theta):
    """sin t / t."""
    t2 = np.square(theta)
    small = t2 < _SERIES_THETA**2
    safe = np.where(small, 1.0, theta)
    direct = np.sin(safe) / safe
    series = 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0
    return np.where(small, series, direct)


def _arc_h(theta):
    """(t - sin t) / t^3."""
    t2 = np.square(theta)
    small = t2 < _SERIES_THETA**2
    safe = np.where(small, 1.0, theta)
    direct = (safe - np.sin(safe)) / safe**3
    series = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    return np.where(small, series, direct)


def _arc_fp_over_t(theta):
    """f'(t) / t  with f = (1 - cos t)/t^2."""
    t2 = np.square(theta)
    small = t2 < _SERIES_THETA**2
    safe = np.where(small, 1.0, theta)
    direct = (safe * np.sin(safe) - 2.0 * (1.0 - np.cos(safe))) / safe**4
    series = -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0
    return np.where(small, series, direct)


def _arc_gp_over_t(theta):
    """g'(t) / t  with g = sin t / t."""
    t2 = np.square(theta)
    small = t2 < _SERIES_THETA**2
    safe = np.where(small, 1.0, theta)
    direct = (safe * np.cos(safe) - np.sin(safe)) / safe**3
    series = -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0
    return np.where(small, series, direct)


# ---------------------------------------------------------------------------
# domain types

def _deg(values):
    return tuple(math.radians(v) for v in values)


@dataclass(frozen=True)
class TendonLayout:
    """Tendon azimuths (rad) and pitch radii (m), one row/value per section."""

    azimuths: tuple[tuple[float, float, float], ...] = (
        _deg((60.0, 180.0, 300.0)),
        _deg((0.0, 120.0, 240.0)),
        _deg((60.0, 180.0, 300.0)),
    )
    pitch_radii: tuple[float, float, float] = (0.02, 0.02, 0.02)

    def __post_init__(self):
        if len(self.azimuths) != N_SECTIONS or len(self.pitch_radii) != N_SECTIONS:
            raise ValueError("layout needs exactly 3 sections")
        for radius in self.pitch_radii:
            if not radius > 0.0:
                raise ValueError(f"pitch radius must be positive, got {radius}")
        for section in self.azimuths:
            if len(section) != TENDONS_PER_SECTION:
                raise ValueError("each section routes exactly 3 tendons")
            rel = sorted((phi - section[0]) % _TAU for phi in section)
            expected = (0.0, _TAU / 3.0, 2.0 * _TAU / 3.0)
            for got, want in zip(rel, expected):
                if abs(got - want) > 1e-12:
                    raise ValueError("tendon azimuths must be spaced 120 degrees apart")

    def azimuth_array(self) -> np.ndarray:
        return np.asarray(self.azimuths, dtype=float)

    def radius_array(self) -> np.ndarray:
        return np.asarray(self.pitch_radii, dtype=float)

    def scaled(self, factor: float) -> "TendonLayout":
        return TendonLayout(self.azimuths, tuple(r * factor for r in self.pitch_radii))


@dataclass(frozen=True)
class ArmGeometry:
    """Arc lengths, lumped masses, bending stiffness and gravity of one arm."""

    section_lengths: tuple[float, float, float] = (0.2, 0.2, 0.2)
    section_masses: tuple[float, float, float] = (0.12, 0.10, 0.08)
    bend_stiffness: tuple[float, float, float] = (0.6, 0.4, 0.25)
    layout: TendonLayout = TendonLayout()
    gravity: tuple[float, float, float] = (0.0, 0.0, -9.81)
    tip_mass: float = 0.0
    theta_max: float = math.pi

    def __post_init__(self):
        for L in self.section_lengths:
            if not L > 0.0:
                raise ValueError("section lengths must be positive")
        for m in self.section_masses:
            if m < 0.0:
                raise ValueError("section masses must be non-negative")
        for k in self.bend_stiffness:
            if not k > 0.0:
                raise ValueError("bending stiffness must be positive")
        if self.tip_mass < 0.0:
            raise ValueError("tip mass must be non-negative")
        if not self.theta_max > 0.0:
            raise ValueError("theta_max must be positive")

    @property
    def total_length(self) -> float:
        return float(sum(self.section_lengths))

    def length_array(self) -> np.ndarray:
        return np.asarray(self.section_lengths, dtype=float)

    def gravity_array(self) -> np.ndarray:
        return np.asarray(self.gravity, dtype=float)

    def scaled(self, factor: float) -> "ArmGeometry":
        """Uniform geometric scaling: arc lengths and pitch radii by `factor`."""
        if not factor > 0.0:
            raise ValueError("scale factor must be positive")
        return ArmGeometry(
            section_lengths=tuple(L * factor for L in self.section_lengths),
            section_masses=self.section_masses,
            bend_stiffness=self.bend_stiffness,
            layout=self.layout.scaled(factor),
            gravity=self.gravity,
            tip_mass=self.tip_mass,
            theta_max=self.theta_max,
        )


def demonstrator_geometry() -> ArmGeometry:
    """Default 0.60 m desk demonstrator (three equal 0.20 m sections)."""
    return ArmGeometry()


def executor_large_geometry() -> ArmGeometry:
    """The 0.98 m executor: the demonstrator scaled by 98/60."""
    return demonstrator_geometry().scaled(0.98 / 0.60)


@dataclass(frozen=True)
class SectionState:
    """One section's bend angle (rad, >= 0) and bending-plane azimuth (rad)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.theta >= 0.0:
            raise ValueError(f"bend angle must be non-negative, got {self.theta}")
        phi = 0.0 if self.theta < THETA_EPS else self.phi % _TAU
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_bend(cls, a: float, b: float) -> "SectionState":
        return cls(math.hypot(a, b), math.atan2(b, a))

    @property
    def bend(self) -> tuple[float, float]:
        return (self.theta * math.cos(self.phi), self.theta * math.sin(self.phi))


@dataclass(frozen=True)
class ArmConfig:
    """Full arm configuration: three SectionStates ordered base to tip."""

    sections: tuple[SectionState, SectionState, SectionState]

    def __post_init__(self):
        if len(self.sections) != N_SECTIONS:
            raise ValueError("an arm configuration has exactly 3 sections")

    @classmethod
    def straight(cls) -> "ArmConfig":
        return cls((SectionState(0.0), SectionState(0.0), SectionState(0.0)))

    @classmethod
    def from_angles(cls, thetas, phis) -> "ArmConfig":
        return cls(tuple(SectionState(t, p) for t, p in zip(thetas, phis)))

    @classmethod
    def from_bend_vector(cls, w) -> "ArmConfig":
        w = np.asarray(w, dtype=float).reshape(N_SECTIONS, 2)
        return cls(tuple(SectionState.from_bend(a, b) for a, b in w))

    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.sections])

    def phis(self) -> np.ndarray:
        return np.array([s.phi for s in self.sections])

    def bend_vector(self) -> np.ndarray:
        """(6,) Cartesian bending coordinates (a1, b1, a2, b2, a3, b3)."""
        return np.array([c for s in self.sections for c in s.bend])


@dataclass(frozen=True, eq=False)
class ArmFrames:
    """Section end frames (base-frame rotation + position) from base to tip."""

    rotations: tuple[np.ndarray, np.ndarray, np.ndarray]
    positions: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def tip_position(self) -> np.ndarray:
        return self.positions[-1]

    @property
    def tip_rotation(self) -> np.ndarray:
        return self.rotations[-1]


# ---------------------------------------------------------------------------
# single-section building blocks

def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _section_rotation(a: float, b: float) -> np.ndarray:
    """Rodrigues rotation for the bend rotation vector (-b, a, 0)."""
    theta = math.hypot(a, b)
    K = _skew(np.array([-b, a, 0.0]))
    return np.eye(3) + float(_arc_g(theta)) * K + float(_arc_f(theta)) * (K @ K)


def _section_translation(a: float, b: float, length: float) -> np.ndarray:
    theta = math.hypot(a, b)
    f = float(_arc_f(theta))
    return np.array([a * length * f, b * length * f, length * float(_arc_g(theta))])


def _left_jacobian(a: float, b: float) -> np.ndarray:
    """SO(3) left Jacobian of the rotation vector (-b, a, 0)."""
    theta = math.hypot(a, b)
    K = _skew(np.array([-b, a, 0.0]))
    return np.eye(3) + float(_arc_f(theta)) * K + float(_arc_h(theta)) * (K @ K)


def _arc_translation_jacobian(a: float, b: float, length: float) -> np.ndarray:
    """3x2 derivative of the arc-end translation w.r.t. the bend coords (a, b)."""
    theta = math.hypot(a, b)
    f = float(_arc_f(theta))
    fpo = float(_arc_fp_over_t(theta))
    gpo = float(_arc_gp_over_t(theta))
    return length * np.array([
        [f + a * a * fpo, a * b * fpo],
        [a * b * fpo, f + b * b * fpo],
        [a * gpo, b * gpo],
    ])


def _cumulative_frames_from_bends(bends: np.ndarray, lengths):
    """Base frames of sections 0..2 plus the tip frame, as (R, p) pairs."""
    frames = [(np.eye(3), np.zeros(3))]
    R, p = frames[0]
    for (a, b), length in zip(bends, lengths):
        p = p + R @ _section_translation(a, b, length)
        R = R @ _section_rotation(a, b)
        frames.append((R, p))
    return frames


def _cumulative_frames(config: ArmConfig, geom: ArmGeometry):
    bends = config.bend_vector().reshape(N_SECTIONS, 2)
    return _cumulative_frames_from_bends(bends, geom.section_lengths)


# ---------------------------------------------------------------------------
# operations

def forward_kinematics(config: ArmConfig, geom: ArmGeometry) -> ArmFrames:
    """Chain the three constant-curvature sections; returns end frames and tip.

    Straight sections reduce to a pure translation along local +z; the arc
    formulas go through theta = 0 analytically.
    """
    frames = _cumulative_frames(config, geom)
    rotations = tuple(R for R, _ in frames[1:])
    positions = tuple(p for _, p in frames[1:])
    return ArmFrames(rotations=rotations, positions=positions)


def tendon_lengths(config: ArmConfig, layout: TendonLayout) -> np.ndarray:
    """Tendon length displacements (m), negative = shortened.

    dl[i, j] = -theta_i * R_i * cos(phi_i - phi_ij) for straight-routed
    tendons at pitch radius R_i; the per-section sum vanishes for 120 degree
    spacing.  Returns the flat (9,) vector ordered (section, tendon).
    """
    az = layout.azimuth_array()
    radii = layout.radius_array()
    thetas = config.thetas()
    phis = config.phis()
    dl = -thetas[:, None] * radii[:, None] * np.cos(phis[:, None] - az)
    return dl.reshape(N_TENDONS)


def config_from_tendons(tendons, layout: TendonLayout):
    """Least-squares perception map from 9 tendon displacements.

    Per section the three measurements are fit with the two bend coordinates;
    returns (ArmConfig, per-section residual norms in meters).
    """
    dl = np.asarray(tendons, dtype=float).reshape(N_SECTIONS, TENDONS_PER_SECTION)
    az = layout.azimuth_array()
    radii = layout.radius_array()
    states = []
    residuals = np.zeros(N_SECTIONS)
    for i in range(N_SECTIONS):
        # dl_j = -R_i (cos(phi_ij) a + sin(phi_ij) b)
        A = -radii[i] * np.column_stack([np.cos(az[i]), np.sin(az[i])])
        w = np.linalg.solve(A.T @ A, A.T @ dl[i])
        residuals[i] = float(np.linalg.norm(A @ w - dl[i]))
        states.append(SectionState.from_bend(w[0], w[1]))
    return ArmConfig(tuple(states)), residuals


def tendon_jacobian(config: ArmConfig, layout: TendonLayout) -> np.ndarray:
    """9x6 analytic derivative of tendon_lengths w.r.t. (theta1, phi1, ...).

    Block diagonal (3 blocks of 3x2); the phi columns are zero by convention
    below THETA_EPS where the azimuth is undefined.
    """
    az = layout.azimuth_array()
    radii = layout.radius_array()
    J = np.zeros((N_TENDONS, 2 * N_SECTIONS))
    for i, state in enumerate(config.sections):
        rows = slice(3 * i, 3 * i + 3)
        delta = state.phi - az[i]
        J[rows, 2 * i] = -radii[i] * np.cos(delta)
        if state.theta >= THETA_EPS:
            J[rows, 2 * i + 1] = state.theta * radii[i] * np.sin(delta)
    return J


def bend_tendon_map(layout: TendonLayout) -> np.ndarray:
    """9x6 constant derivative of tendon_lengths w.r.t. the Cartesian bend
    coordinates; rows are -R_i (cos(phi_ij), sin(phi_ij)) in the section block.
    """
    az = layout.azimuth_array()
    radii = layout.radius_array()
    J = np.zeros((N_TENDONS, 2 * N_SECTIONS))
    for i in range(N_SECTIONS):
        rows = slice(3 * i, 3 * i + 3)
        J[rows, 2 * i] = -radii[i] * np.cos(az[i])
        J[rows, 2 * i + 1] = -radii[i] * np.sin(az[i])
    return J


def arm_point_kinematics(config: ArmConfig, geom: ArmGeometry, points):
    """Positions and bend-coordinate Jacobians of material points on the arm.

    Args:
        points: iterable of (section index, local arc length s in [0, L_i]).

    Returns:
        positions: (M, 3) base-frame positions.
        jacobians: (M, 3, 6) derivatives w.r.t. (a1, b1, a2, b2, a3, b3).

    The own-section block differentiates the sub-arc directly; for proximal
    sections the point rides rigidly on the chain, handled with the SO(3)
    left Jacobian of the section's rotation vector.
    """
    bends = config.bend_vector().reshape(N_SECTIONS, 2)
    return point_kinematics_from_bends(bends, geom.section_lengths, points)


def point_kinematics_from_bends(bends, lengths, points):
    """arm_point_kinematics on raw (3, 2) bend coordinates.

    Keeps sub-THETA_EPS bend directions intact, which the equilibrium solver
    relies on; the ArmConfig path canonicalizes the azimuth there.
    """
    bends = np.asarray(bends, dtype=float)
    frames = _cumulative_frames_from_bends(bends, lengths)
    points = list(points)
    positions = np.zeros((len(points), 3))
    jacobians = np.zeros((len(points), 3, 6))
    for m, (k, s) in enumerate(points):
        if not 0.0 <= s <= lengths[k] * (1.0 + 1e-12):
            raise ValueError(f"arc coordinate {s} outside section {k}")
        Rk, pk = frames[k]
        ak, bk = bends[k]
        sigma = s / lengths[k]
        local = _section_translation(sigma * ak, sigma * bk, s)
        x = pk + Rk @ local
        positions[m] = x
        jacobians[m, :, 2 * k:2 * k + 2] = Rk @ (
            sigma * _arc_translation_jacobian(sigma * ak, sigma * bk, s)
        )
        for j in range(k):
            Rj, _ = frames[j]
            _, p_next = frames[j + 1]
            aj, bj = bends[j]
            rotated = Rj.T @ (x - p_next)  # point relative to section j end, in j's base axes
            block = _arc_translation_jacobian(aj, bj, lengths[j]) - _skew(rotated) @ (
                _left_jacobian(aj, bj) @ _AXIS_FROM_W
            )
            jacobians[m, :, 2 * j:2 * j + 2] = Rj @ block
    return positions, jacobians


# ---------------------------------------------------------------------------
# batch tip positions + workspace extents

def batch_tip_positions(thetas, phis, geom: ArmGeometry) -> np.ndarray:
    """Vectorized tip positions for (N, 3) theta/phi sample arrays."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    n = thetas.shape[0]
    R = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    p = np.zeros((n, 3))
    for i, length in enumerate(geom.section_lengths):
        a = thetas[:, i] * np.cos(phis[:, i])
        b = thetas[:, i] * np.sin(phis[:, i])
        t = thetas[:, i]
        f = _arc_f(t)
        g = _arc_g(t)
        trans = np.stack([a * length * f, b * length * f, length * g], axis=1)
        K = np.zeros((n, 3, 3))
        K[:, 0, 2] = a
        K[:, 1, 2] = b
        K[:, 2, 0] = -a
        K[:, 2, 1] = -b
        Ri = np.eye(3) + g[:, None, None] * K + f[:, None, None] * (K @ K)
        p = p + np.einsum("nij,nj->ni", R, trans)
        R = R @ Ri
    return p


def workspace_extents(geom: ArmGeometry, n_samples: int) -> tuple[float, float]:
    """Reachable-tip extents (width over x, height over z) in meters.

    Deterministic unscrambled Halton sampling of (theta_i, phi_i) within the
    geometry's limits, so results are reproducible bit-for-bit.
    """
    if n_samples < 1000:
        raise ValueError("workspace sampling needs at least 1000 samples")
    from scipy.stats import qmc

    u = qmc.Halton(d=2 * N_SECTIONS, scramble=False).random(n_samples)
    thetas = u[:, :N_SECTIONS] * geom.theta_max
    phis = u[:, N_SECTIONS:] * _TAU
    tips = batch_tip_positions(thetas, phis, geom)
    width = float(tips[:, 0].max() - tips[:, 0].min())
    height = float(tips[:, 2].max() - tips[:, 2].min())
    return width, height
