"""Static arm-pose classification and the sustained-hold command timer.

Classification looks only at the relative geometry of the two wrists
against the torso landmarks, so it is invariant to where the person
stands. A command fires once the same pose has been held continuously
for the configured minimum time; brief sensor dropouts and single-frame
pose flickers are bridged rather than resetting the hold.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .skeleton import JointId, SkeletonFrame, TrackState


class PoseLabel(Enum):
    TOGGLE_RECORD = "toggle-record"
    BLACKBOARD = "blackboard"
    CANVAS = "canvas"
    SPEAKER = "speaker"
    UNDEFINED = "undefined"


COMMAND_LABELS = (
    PoseLabel.TOGGLE_RECORD,
    PoseLabel.BLACKBOARD,
    PoseLabel.CANVAS,
    PoseLabel.SPEAKER,
)

# Joints that must be solidly tracked before a frame may classify as a command.
REQUIRED_JOINTS = (
    JointId.LEFT_WRIST,
    JointId.RIGHT_WRIST,
    JointId.LEFT_SHOULDER,
    JointId.RIGHT_SHOULDER,
    JointId.HEAD,
    JointId.SPINE,
    JointId.HIP_CENTER,
    JointId.SHOULDER_CENTER,
)


@dataclass(frozen=True)
class GestureConfig:
    hold_min: float = 2.0
    hold_max: float = 4.0
    dropout_tolerance: int = 3
    occlusion_tolerance: float = 0.5
    refractory: float = 0.5
    raise_margin: float = 0.10
    side_margin: float = 0.25
    chest_depth: float = 0.35
    cross_margin: float = 0.05

    def __post_init__(self):
        if not (0 < self.hold_min <= self.hold_max):
            raise ValueError("require 0 < hold_min <= hold_max")
        for name in ("raise_margin", "side_margin", "chest_depth", "cross_margin"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.dropout_tolerance < 0 or self.refractory < 0 or self.occlusion_tolerance < 0:
            raise ValueError("tolerances must be >= 0")


@dataclass(frozen=True)
class GestureEvent:
    label: PoseLabel
    fired_at: float
    held_for: float

    def __post_init__(self):
        if self.label is PoseLabel.UNDEFINED:
            raise ValueError("events carry a command label, never Undefined")


def _raised(wrist, head, cfg: GestureConfig) -> bool:
    return wrist.position[1] > head.position[1] + cfg.raise_margin


def _side_down(wrist, shoulder, hip_center, cfg: GestureConfig) -> bool:
    return (
        wrist.position[1] < hip_center.position[1] + cfg.raise_margin
        and abs(wrist.position[0] - shoulder.position[0]) < cfg.side_margin
    )


def _chest(wrist, spine, shoulder_center, cfg: GestureConfig) -> bool:
    return (
        spine.position[1] < wrist.position[1] < shoulder_center.position[1]
        and abs(wrist.position[2] - spine.position[2]) < cfg.chest_depth
    )


def _crossed(right_wrist, left_wrist, spine, cfg: GestureConfig) -> bool:
    return (
        right_wrist.position[0] < spine.position[0] - cfg.cross_margin
        and left_wrist.position[0] > spine.position[0] + cfg.cross_margin
    )


def occlusion_gate(frame: SkeletonFrame) -> bool:
    """True when the frame is usable: person present and every required joint Tracked."""
    if not frame.person_present:
        return False
    return all(frame.joint(j).track is TrackState.TRACKED for j in REQUIRED_JOINTS)


def classify_pose(frame: SkeletonFrame, cfg: GestureConfig | None = None) -> PoseLabel:
    """Label the frame's pose; Undefined when occluded or matching no command."""
    cfg = cfg or GestureConfig()
    if not occlusion_gate(frame):
        return PoseLabel.UNDEFINED
    lw = frame.joint(JointId.LEFT_WRIST)
    rw = frame.joint(JointId.RIGHT_WRIST)
    head = frame.joint(JointId.HEAD)
    spine = frame.joint(JointId.SPINE)
    sc = frame.joint(JointId.SHOULDER_CENTER)
    hc = frame.joint(JointId.HIP_CENTER)
    ls = frame.joint(JointId.LEFT_SHOULDER)

    r_raised = _raised(rw, head, cfg)
    l_raised = _raised(lw, head, cfg)
    if l_raised and r_raised:
        return PoseLabel.TOGGLE_RECORD
    if r_raised and _side_down(lw, ls, hc, cfg):
        return PoseLabel.CANVAS
    if r_raised and _chest(lw, spine, sc, cfg):
        return PoseLabel.BLACKBOARD
    if _chest(lw, spine, sc, cfg) and _chest(rw, spine, sc, cfg) and _crossed(rw, lw, spine, cfg):
        return PoseLabel.SPEAKER
    return PoseLabel.UNDEFINED


@dataclass
class HoldTimer:
    """Turns a stream of classified frames into at-most-one command event per hold.

    The hold clock is wall time since the first frame of the pose. Two
    kinds of interruption are bridged without restarting the clock:
    occlusion dropouts (gate failures) for up to ``occlusion_tolerance``
    seconds, and geometric flickers to another label for up to
    ``dropout_tolerance`` consecutive frames. Anything longer resets.
    After an event fires, a fresh hold may begin only once the fired
    label has been absent for the refractory period.
    """

    cfg: GestureConfig = field(default_factory=GestureConfig)
    label: PoseLabel = PoseLabel.UNDEFINED
    hold_start: float | None = None
    last_t: float | None = None
    last_match_t: float | None = None
    gap_frames: int = 0
    occluded_since: float | None = None
    fired: bool = False
    refractory_label: PoseLabel | None = None
    quiet_since: float | None = None

    def elapsed(self, now: float | None = None) -> float:
        if self.hold_start is None:
            return 0.0
        ref = now if now is not None else (self.last_match_t or self.hold_start)
        return ref - self.hold_start

    def _reset_hold(self):
        self.label = PoseLabel.UNDEFINED
        self.hold_start = None
        self.last_match_t = None
        self.gap_frames = 0
        self.occluded_since = None
        self.fired = False

    def _begin_hold(self, label: PoseLabel, t: float):
        self.label = label
        self.hold_start = t
        self.last_match_t = t
        self.gap_frames = 0
        self.occluded_since = None
        self.fired = False

    def update(self, frame: SkeletonFrame) -> GestureEvent | None:
        if self.last_t is not None and frame.t < self.last_t:
            raise ValueError(f"time regression: {frame.t} after {self.last_t}")
        self.last_t = frame.t
        t = frame.t

        gated = occlusion_gate(frame)
        label = classify_pose(frame, self.cfg) if gated else PoseLabel.UNDEFINED

        # Refractory bookkeeping: the fired label must stay away for a
        # continuous quiet period before it may fire again.
        if self.refractory_label is not None:
            if self.quiet_since is not None and t - self.quiet_since >= self.cfg.refractory:
                self.refractory_label = None
                self.quiet_since = None
            elif gated and label is self.refractory_label:
                self.quiet_since = None
            elif self.quiet_since is None:
                self.quiet_since = t

        if self.hold_start is None:
            if label is not PoseLabel.UNDEFINED and label is not self.refractory_label:
                self._begin_hold(label, t)
            return None

        if label is self.label:
            self.gap_frames = 0
            self.occluded_since = None
            self.last_match_t = t
            if not self.fired and (t - self.hold_start) >= self.cfg.hold_min:
                self.fired = True
                self.refractory_label = self.label
                self.quiet_since = None
                return GestureEvent(self.label, fired_at=t, held_for=t - self.hold_start)
            return None

        if not gated:
            # Sensor dropout: bridge silently up to the occlusion tolerance.
            if self.occluded_since is None:
                self.occluded_since = t
            if t - self.occluded_since > self.cfg.occlusion_tolerance:
                self._reset_hold()
            return None

        # Geometric deviation (different pose or Undefined with full tracking).
        self.occluded_since = None
        self.gap_frames += 1
        if self.gap_frames > self.cfg.dropout_tolerance:
            self._reset_hold()
            if label is not PoseLabel.UNDEFINED and label is not self.refractory_label:
                self._begin_hold(label, t)
        return None

    def led_hint(self) -> bool:
        """True while a command pose is accumulating hold time, within the command window."""
        if self.hold_start is None or self.label is PoseLabel.UNDEFINED:
            return False
        return self.elapsed() < self.cfg.hold_max


def hold_state_copy(timer: HoldTimer) -> HoldTimer:
    return replace(timer)
