"""Deterministic simulator for a gesture-directed class-recording rig:
skeleton-stream ingestion, static-pose command recognition, dual pan/tilt
carrier control with smooth stepper ramps, scene direction with session
segmentation, a bit-exact controller wire protocol, and an evaluation
harness for recognition accuracy.
"""

from .skeleton import (
    Joint,
    JointId,
    ParseError,
    SkeletonFrame,
    Trace,
    TrackState,
    ValidationError,
    joint_of,
    parse_trace,
    resample,
    serialize_trace,
)
from .gesture import GestureConfig, GestureEvent, HoldTimer, PoseLabel, classify_pose
from .motion import (
    MotionProfile,
    MotorFsm,
    MotorGeometry,
    MotorState,
    StepEvent,
    StepSchedule,
    build_profile,
    plan_move,
    steps_to_angle,
)
from .rig import Rig, RigGeometry, bearing_to, in_fov
from .director import DirectorState, LedPanel, Presets, SceneMode, led_state, on_gesture, on_skeleton
from .session import SceneTick, SessionEDL, export_edl, parse_edl
from .protocol import Command, ControlFrame, FrameDecoder, crc8, decode, encode
from .config import RoomModel, SystemConfig, load_config, dump_config
from .corpus import CorpusSpec, SpeakerScript, TruthClass, TruthWindow, generate_corpus
from .evaluate import ConfusionMatrix, matrix_to_csv, run_eval, success_rates
from .sim import Simulator, run_scenario

__version__ = "0.1.0"
