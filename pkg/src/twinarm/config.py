"""Declarative configuration: one INI-style file drives geometry, friction,
stiffness, tracking, session and experiment settings.

All lengths are meters, angles are degrees in the file (radians internally),
forces Newtons, currents Amperes.  Every key is optional; omitted keys keep
the built-in defaults.  Example:

    [geometry]
    section_lengths = 0.2, 0.2, 0.2
    section_masses = 0.12, 0.10, 0.08
    bend_stiffness = 0.6, 0.4, 0.25
    pitch_radii = 0.02, 0.02, 0.02
    gravity = 0, 0, -9.81
    tip_mass = 0.0
    theta_max_deg = 180

    [layout]
    section1_azimuths_deg = 60, 180, 300
    section2_azimuths_deg = 0, 120, 240
    section3_azimuths_deg = 60, 180, 300

    [friction]
    mu_static = 0.3
    mu_kinetic = 0.2
    alpha = 0.5
    beta = 0.5
    k_act = 20.0
    c_act = 0.5
    mobility = 0.005

    [stiffness]
    current_low = 0.1
    current_high = 0.6
    k_stiff_low = 0.0
    k_stiff_high = 0.8

    [tracking]
    hysteresis = 0.002
    rate_limit = 0.05
    time_constant = 0.05

    [session]
    rate_hz = 100
    scale = 1.0
    profile = LLL
    endpoint = tcp://127.0.0.1:7411

    [experiment]
    load_amplitude = 2.5
    load_period = 8.0
    seed = 0
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .kinematics import ArmGeometry, TendonLayout
from .mapping import ScaleMapping, StiffnessProfile, TrackingParams
from .statics import DEFAULT_MOBILITY, FrictionParams


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentDefaults:
    load_amplitude: float = 2.5   # N
    load_period: float = 8.0      # s
    seed: int = 0


@dataclass
class TwinConfig:
    """Everything a run needs, bundled."""

    geometry: ArmGeometry = field(default_factory=ArmGeometry)
    friction: FrictionParams = field(default_factory=FrictionParams)
    profile: StiffnessProfile = field(default_factory=StiffnessProfile)
    tracking: TrackingParams = field(default_factory=TrackingParams)
    scale: ScaleMapping = field(default_factory=ScaleMapping)
    rate_hz: float = 100.0
    endpoint: str = "tcp://127.0.0.1:7411"
    mobility: float = DEFAULT_MOBILITY
    experiment: ExperimentDefaults = field(default_factory=ExperimentDefaults)

    def executor_geometry(self) -> ArmGeometry:
        return self.geometry.scaled(self.scale.factor)


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in raw.split(",") if v.strip())


def _triple(raw: str, key: str) -> tuple[float, float, float]:
    values = _floats(raw)
    if len(values) != 3:
        raise ConfigError(f"{key} needs exactly 3 comma-separated values")
    return values  # type: ignore[return-value]


def load_config(path: str | None = None) -> TwinConfig:
    """Build a TwinConfig from an INI file; None gives pure defaults."""
    if path is None:
        return TwinConfig()
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    try:
        return _from_parser(parser)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _from_parser(parser: configparser.ConfigParser) -> TwinConfig:
    defaults = TwinConfig()

    geo = parser["geometry"] if parser.has_section("geometry") else {}
    lay = parser["layout"] if parser.has_section("layout") else {}
    base = defaults.geometry
    layout = base.layout
    if lay:
        azimuths = []
        for i in range(1, 4):
            key = f"section{i}_azimuths_deg"
            if key in lay:
                azimuths.append(tuple(math.radians(v) for v in _triple(lay[key], key)))
            else:
                azimuths.append(layout.azimuths[i - 1])
        layout = TendonLayout(azimuths=tuple(azimuths), pitch_radii=layout.pitch_radii)
    if "pitch_radii" in geo:
        layout = TendonLayout(azimuths=layout.azimuths,
                              pitch_radii=_triple(geo["pitch_radii"], "pitch_radii"))
    geometry = ArmGeometry(
        section_lengths=_triple(geo["section_lengths"], "section_lengths")
        if "section_lengths" in geo else base.section_lengths,
        section_masses=_triple(geo["section_masses"], "section_masses")
        if "section_masses" in geo else base.section_masses,
        bend_stiffness=_triple(geo["bend_stiffness"], "bend_stiffness")
        if "bend_stiffness" in geo else base.bend_stiffness,
        layout=layout,
        gravity=_triple(geo["gravity"], "gravity") if "gravity" in geo else base.gravity,
        tip_mass=float(geo.get("tip_mass", base.tip_mass)),
        theta_max=math.radians(float(geo["theta_max_deg"]))
        if "theta_max_deg" in geo else base.theta_max,
    )

    fr = parser["friction"] if parser.has_section("friction") else {}
    fp = defaults.friction
    friction = FrictionParams(
        mu_static=float(fr.get("mu_static", fp.mu_static)),
        mu_kinetic=float(fr.get("mu_kinetic", fp.mu_kinetic)),
        alpha=float(fr.get("alpha", fp.alpha)),
        beta=float(fr.get("beta", fp.beta)),
        k_act=float(fr.get("k_act", fp.k_act)),
        c_act=float(fr.get("c_act", fp.c_act)),
        k_kf=float(fr["k_kf"]) if "k_kf" in fr else None,
        c_kf=float(fr["c_kf"]) if "c_kf" in fr else None,
    )
    mobility = float(fr.get("mobility", defaults.mobility))

    st = parser["stiffness"] if parser.has_section("stiffness") else {}
    ses = parser["session"] if parser.has_section("session") else {}
    sp = defaults.profile
    profile = StiffnessProfile(
        levels=str(ses.get("profile", sp.levels)).strip().upper(),
        current_low=float(st.get("current_low", sp.current_low)),
        current_high=float(st.get("current_high", sp.current_high)),
        k_stiff_low=float(st.get("k_stiff_low", sp.k_stiff_low)),
        k_stiff_high=float(st.get("k_stiff_high", sp.k_stiff_high)),
    )

    tr = parser["tracking"] if parser.has_section("tracking") else {}
    tp = defaults.tracking
    tracking = TrackingParams(
        hysteresis=float(tr.get("hysteresis", tp.hysteresis)),
        rate_limit=float(tr.get("rate_limit", tp.rate_limit)),
        time_constant=float(tr.get("time_constant", tp.time_constant)),
    )

    scale = ScaleMapping(float(ses.get("scale", defaults.scale.factor)))
    rate_hz = float(ses.get("rate_hz", defaults.rate_hz))
    endpoint = str(ses.get("endpoint", defaults.endpoint))

    ex = parser["experiment"] if parser.has_section("experiment") else {}
    ed = ExperimentDefaults(
        load_amplitude=float(ex.get("load_amplitude", ExperimentDefaults.load_amplitude)),
        load_period=float(ex.get("load_period", ExperimentDefaults.load_period)),
        seed=int(ex.get("seed", ExperimentDefaults.seed)),
    )

    return TwinConfig(geometry=geometry, friction=friction, profile=profile,
                      tracking=tracking, scale=scale, rate_hz=rate_hz,
                      endpoint=endpoint, mobility=mobility, experiment=ed)
