"""Physical-twin teleoperation of a tendon-driven continuum arm.

A back-drivable three-section demonstrator arm, modeled quasi-statically
with per-tendon stick-slip friction, streams its tendon displacements over
a binary frame protocol to a (possibly scaled) executor arm.  An experiment
harness reproduces trajectory-tracing, stiffness-distribution and
narrow-gap scenarios headlessly; a WebSocket feed drives the browser
operator console.
"""

from .config import ConfigError, TwinConfig, load_config
from .kinematics import (
    ArmConfig,
    ArmFrames,
    ArmGeometry,
    SectionState,
    TendonLayout,
    config_from_tendons,
    demonstrator_geometry,
    executor_large_geometry,
    forward_kinematics,
    tendon_jacobian,
    tendon_lengths,
    workspace_extents,
)
from .mapping import (
    DeviationReport,
    ScaleMapping,
    StiffnessProfile,
    TrackingParams,
    apply_stiffness_profile,
    deviation_metrics,
    executor_track,
    map_tendons,
    stiffness_moment,
)
from .protocol import (
    FRAME_SIZE,
    TendonFrame,
    decode_frame,
    encode_frame,
    record_trace,
    replay_trace,
)
from .session import SessionConfig, SessionStats, TransportError, run_session
from .statics import (
    ArmState,
    EquilibriumResult,
    ExternalLoad,
    FrictionParams,
    TendonChannelState,
    actuation_force,
    backdrive_step,
    elastic_moment,
    gravity_moment,
    hold_check,
    kinetic_friction,
    rest_state,
    solve_equilibrium,
    static_friction_limit,
    tendon_moment,
)

__version__ = "0.1.0"
