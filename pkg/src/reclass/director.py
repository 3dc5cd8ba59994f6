"""Scene direction: gesture commands drive the recorder and the camera
carrier, while the sensor carrier tracks the speaker unconditionally.

The director owns three things: the active scene mode, the recording
flag, and the five-light feedback panel. The camera rig is retargeted on
mode changes (presets for blackboard/canvas) and follows the speaker
only in follow mode; the sensor rig follows the speaker in every mode so
no gesture is ever missed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .gesture import GestureEvent, PoseLabel
from .rig import Rig, bearing_to, sensor_to_room
from .skeleton import JointId, SkeletonFrame

Vec3 = tuple[float, float, float]


class SceneMode(Enum):
    FOLLOW_SPEAKER = "follow"
    BLACKBOARD = "blackboard"
    CANVAS = "canvas"


@dataclass(frozen=True)
class Presets:
    blackboard: tuple[float, float] = (-20.0, 2.0)
    canvas: tuple[float, float] = (20.0, 6.0)


@dataclass(frozen=True)
class LedPanel:
    power: bool = True
    command_window: bool = False
    follow: bool = True
    blackboard: bool = False
    canvas: bool = False

    def mask(self) -> int:
        bits = (self.power, self.command_window, self.follow, self.blackboard, self.canvas)
        return sum(1 << i for i, b in enumerate(bits) if b)

    @classmethod
    def from_mask(cls, mask: int) -> "LedPanel":
        return cls(*(bool(mask >> i & 1) for i in range(5)))


@dataclass(frozen=True)
class RigCommand:
    rig: str  # "s1" | "s2"
    azimuth: float | None = None
    elevation: float | None = None


@dataclass
class DirectorState:
    mode: SceneMode = SceneMode.FOLLOW_SPEAKER
    recording: bool = False
    deadband: float = 5.0
    retarget_interval: float = 0.2
    last_cmd_t: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.deadband <= 0:
            raise ValueError("deadband must be > 0")


@dataclass(frozen=True)
class RecorderAction:
    """Segment boundary request emitted when ToggleRecord fires."""

    start: bool
    at: float


MODE_FOR_LABEL = {
    PoseLabel.BLACKBOARD: SceneMode.BLACKBOARD,
    PoseLabel.CANVAS: SceneMode.CANVAS,
    PoseLabel.SPEAKER: SceneMode.FOLLOW_SPEAKER,
}


def led_state(state: DirectorState, hint: bool) -> LedPanel:
    return LedPanel(
        power=True,
        command_window=hint,
        follow=state.mode is SceneMode.FOLLOW_SPEAKER,
        blackboard=state.mode is SceneMode.BLACKBOARD,
        canvas=state.mode is SceneMode.CANVAS,
    )


def on_gesture(
    state: DirectorState, event: GestureEvent, presets: Presets
) -> tuple[DirectorState, list[RigCommand], LedPanel, RecorderAction | None]:
    """Apply one command event; never touches the sensor carrier."""
    if event.label is PoseLabel.UNDEFINED:
        raise ValueError("director only accepts command events")
    commands: list[RigCommand] = []
    action: RecorderAction | None = None
    new = replace(state, last_cmd_t=dict(state.last_cmd_t))
    if event.label is PoseLabel.TOGGLE_RECORD:
        new.recording = not state.recording
        action = RecorderAction(start=new.recording, at=event.fired_at)
    else:
        new.mode = MODE_FOR_LABEL[event.label]
        if event.label is PoseLabel.BLACKBOARD:
            commands.append(RigCommand("s2", *presets.blackboard))
        elif event.label is PoseLabel.CANVAS:
            commands.append(RigCommand("s2", *presets.canvas))
    return new, commands, led_state(new, hint=False), action


def speaker_anchor(frame: SkeletonFrame, s1: Rig) -> tuple[Vec3, Vec3]:
    """Room-frame (torso, head) reference points for tracking."""
    sc = frame.joint(JointId.SHOULDER_CENTER).position
    sp = frame.joint(JointId.SPINE).position
    torso_sensor = tuple((a + b) / 2.0 for a, b in zip(sc, sp))
    head_sensor = frame.joint(JointId.HEAD).position
    return (
        sensor_to_room(s1, torso_sensor),
        sensor_to_room(s1, head_sensor),
    )


def on_skeleton(
    state: DirectorState, frame: SkeletonFrame, s1: Rig, s2: Rig
) -> list[RigCommand]:
    """Follow-the-speaker corrections for both carriers.

    The sensor rig pans toward the torso in every mode; the camera rig
    pans and tilts toward the speaker only in follow mode. Errors inside
    the deadband, and commands more frequent than the per-rig retarget
    interval, are suppressed.
    """
    if not frame.person_present:
        return []
    torso_room, head_room = speaker_anchor(frame, s1)
    commands: list[RigCommand] = []

    def due(rig_name: str) -> bool:
        last = state.last_cmd_t.get(rig_name)
        return last is None or (frame.t - last) >= state.retarget_interval

    s1_az, _ = bearing_to(s1.geometry, torso_room)
    if abs(s1_az - s1.azimuth) > state.deadband and due("s1"):
        commands.append(RigCommand("s1", azimuth=s1_az))
        state.last_cmd_t["s1"] = frame.t

    if state.mode is SceneMode.FOLLOW_SPEAKER:
        s2_az, _ = bearing_to(s2.geometry, torso_room)
        _, s2_el = bearing_to(s2.geometry, head_room)
        if (
            abs(s2_az - s2.azimuth) > state.deadband
            or abs(s2_el - s2.elevation) > state.deadband
        ) and due("s2"):
            commands.append(RigCommand("s2", azimuth=s2_az, elevation=s2_el))
            state.last_cmd_t["s2"] = frame.t
    return commands
