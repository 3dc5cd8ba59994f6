"""Synthetic speaker: canonical command poses, scripted walks around the
room, and seeded corpus generation with position noise and per-joint
tracking dropouts.

Joint placements are derived from the classifier thresholds so each
canonical pose sits well inside its predicate region (one-sided clauses
get at least twice the threshold in slack; banded clauses sit at band
center). The delusive poses are static near-misses placed 1.5 thresholds
on the wrong side of a predicate boundary, so they resemble commands
without ever satisfying one.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .gesture import GestureConfig, PoseLabel
from .rig import Rig, RigGeometry, room_to_sensor, sensor_carrier_geometry
from .skeleton import JOINT_ORDER, Joint, JointId, SkeletonFrame, Trace, TrackState

FRAME_RATE = 30.0

# Body landmark heights (metres above the floor) and half-widths.
HEAD_H = 1.65
SHOULDER_CENTER_H = 1.45
SPINE_H = 1.10
HIP_CENTER_H = 0.95
SHOULDER_R = 0.20
SHOULDER_H = 1.42

# person-local offsets: (r, h, f) = toward person's right, height, toward sensor
BASE_BODY: dict[JointId, tuple[float, float, float]] = {
    JointId.HEAD: (0.0, HEAD_H, 0.0),
    JointId.SHOULDER_CENTER: (0.0, SHOULDER_CENTER_H, 0.0),
    JointId.SPINE: (0.0, SPINE_H, 0.0),
    JointId.HIP_CENTER: (0.0, HIP_CENTER_H, 0.0),
    JointId.LEFT_SHOULDER: (-SHOULDER_R, SHOULDER_H, 0.0),
    JointId.RIGHT_SHOULDER: (SHOULDER_R, SHOULDER_H, 0.0),
    JointId.LEFT_ELBOW: (-0.26, 1.12, 0.02),
    JointId.RIGHT_ELBOW: (0.26, 1.12, 0.02),
    JointId.LEFT_WRIST: (-0.25, 0.78, 0.04),
    JointId.RIGHT_WRIST: (0.25, 0.78, 0.04),
    JointId.LEFT_HAND: (-0.25, 0.69, 0.05),
    JointId.RIGHT_HAND: (0.25, 0.69, 0.05),
    JointId.LEFT_HIP: (-0.12, 0.93, 0.0),
    JointId.RIGHT_HIP: (0.12, 0.93, 0.0),
    JointId.LEFT_KNEE: (-0.13, 0.52, 0.02),
    JointId.RIGHT_KNEE: (0.13, 0.52, 0.02),
    JointId.LEFT_ANKLE: (-0.14, 0.10, 0.0),
    JointId.RIGHT_ANKLE: (0.14, 0.10, 0.0),
    JointId.LEFT_FOOT: (-0.14, 0.04, 0.12),
    JointId.RIGHT_FOOT: (0.14, 0.04, 0.12),
}

COMMAND_POSES = ("toggle-record", "blackboard", "canvas", "speaker")
DELUSIVE_POSES = (
    "delusive-near-toggle",
    "delusive-near-blackboard",
    "delusive-low-cross",
    "delusive-mirror-canvas",
    "delusive-uncrossed-chest",
)


def pose_offsets(name: str, cfg: GestureConfig | None = None) -> dict[JointId, tuple[float, float, float]]:
    """Joint offsets for a named static pose (commands, delusives, neutral)."""
    cfg = cfg or GestureConfig()
    body = dict(BASE_BODY)
    raised_h = HEAD_H + 3.0 * cfg.raise_margin
    near_raise_h = HEAD_H + cfg.raise_margin - 1.5 * cfg.raise_margin
    side_h = HIP_CENTER_H - cfg.raise_margin
    chest_h = (SPINE_H + SHOULDER_CENTER_H) / 2.0
    chest_f = cfg.chest_depth - 0.10
    cross_r = cfg.cross_margin + 0.11

    def arm(side: int, wrist, elbow):
        # side: +1 right, -1 left; placements given for the right arm
        wr, wh, wf = wrist
        er, eh, ef = elbow
        body[JointId.RIGHT_WRIST if side > 0 else JointId.LEFT_WRIST] = (side * wr, wh, wf)
        body[JointId.RIGHT_ELBOW if side > 0 else JointId.LEFT_ELBOW] = (side * er, eh, ef)
        body[JointId.RIGHT_HAND if side > 0 else JointId.LEFT_HAND] = (side * wr, wh + 0.09, wf)

    raised_arm = ((SHOULDER_R, raised_h, 0.0), (0.24, 1.62, 0.02))
    near_raised_arm = ((SHOULDER_R, near_raise_h, 0.04), (0.26, 1.38, 0.05))
    side_arm = ((SHOULDER_R, side_h, 0.03), (0.24, 1.14, 0.02))
    chest_arm_natural = ((0.10, chest_h, chest_f), (0.26, 1.16, 0.10))
    chest_arm_crossed = ((-cross_r, chest_h, chest_f), (0.20, 1.14, 0.12))

    if name == "neutral":
        pass
    elif name == "toggle-record":
        arm(+1, *raised_arm)
        arm(-1, *raised_arm)
    elif name == "canvas":
        arm(+1, *raised_arm)
        arm(-1, *side_arm)
    elif name == "blackboard":
        arm(+1, *raised_arm)
        arm(-1, *chest_arm_natural)
    elif name == "speaker":
        arm(+1, *chest_arm_crossed)
        arm(-1, *chest_arm_crossed)
    elif name == "delusive-near-toggle":
        arm(+1, *near_raised_arm)
        arm(-1, *near_raised_arm)
    elif name == "delusive-near-blackboard":
        arm(+1, *near_raised_arm)
        arm(-1, *chest_arm_natural)
    elif name == "delusive-low-cross":
        low_cross = ((-cross_r, side_h, 0.12), (0.20, 0.96, 0.08))
        arm(+1, *low_cross)
        arm(-1, *low_cross)
    elif name == "delusive-mirror-canvas":
        arm(-1, *raised_arm)
        arm(+1, *side_arm)
    elif name == "delusive-uncrossed-chest":
        arm(+1, *chest_arm_natural)
        arm(-1, *chest_arm_natural)
    else:
        raise ValueError(f"unknown pose {name!r}")
    return body


def _home_rig(geometry: RigGeometry | None = None) -> Rig:
    return Rig(geometry=geometry or sensor_carrier_geometry())


def make_frame(
    t: float,
    px: float,
    pz: float,
    offsets: dict[JointId, tuple[float, float, float]],
    s1: Rig,
    rng: random.Random | None = None,
    sigma: float = 0.0,
    dropout: float = 0.0,
    present: bool = True,
) -> SkeletonFrame:
    """Render one skeleton frame into the rig's current sensor frame."""
    joints = []
    for jid in JOINT_ORDER:
        r, h, f = offsets[jid]
        room = (px - r, h, pz + f)
        x, y, z = room_to_sensor(s1, room)
        track = TrackState.TRACKED
        if rng is not None:
            if sigma > 0.0:
                x += rng.gauss(0.0, sigma)
                y += rng.gauss(0.0, sigma)
                z += rng.gauss(0.0, sigma)
            if dropout > 0.0 and rng.random() < dropout:
                track = TrackState.NOT_TRACKED
        joints.append(Joint(jid, (x, y, z), track))
    return SkeletonFrame(t=t, joints=tuple(joints), person_present=present)


class TruthClass(Enum):
    START = "start"
    STOP = "stop"
    BLACKBOARD = "blackboard"
    CANVAS = "canvas"
    SPEAKER = "speaker"
    UNDEFINED = "undefined"


TRUTH_ORDER = tuple(TruthClass)


@dataclass(frozen=True)
class TruthWindow:
    start: float
    stop: float
    truth: TruthClass
    pose: str


@dataclass(frozen=True)
class Walk:
    x: float
    z: float
    speed: float = 0.5


@dataclass(frozen=True)
class Stand:
    duration: float


@dataclass(frozen=True)
class Hold:
    pose: str
    duration: float


@dataclass
class SpeakerScript:
    """Timed sequence of walks, stands, and held poses, starting at (x, z)."""

    start_x: float = 3.0
    start_z: float = 1.5
    steps: list = field(default_factory=list)

    def states(self, rate: float = FRAME_RATE):
        """Yield (t, x, z, pose_name) at the given frame rate until the script ends."""
        x, z = self.start_x, self.start_z
        t = 0.0
        dt = 1.0 / rate
        yield (t, x, z, "neutral")
        for step in self.steps:
            if isinstance(step, Walk):
                dist = math.hypot(step.x - x, step.z - z)
                duration = dist / step.speed if step.speed > 0 else 0.0
                n = max(1, round(duration * rate))
                x0, z0 = x, z
                for k in range(1, n + 1):
                    t += dt
                    u = k / n
                    yield (t, x0 + (step.x - x0) * u, z0 + (step.z - z0) * u, "neutral")
                x, z = step.x, step.z
            elif isinstance(step, (Stand, Hold)):
                pose = step.pose if isinstance(step, Hold) else "neutral"
                n = max(1, round(step.duration * rate))
                for _ in range(n):
                    t += dt
                    yield (t, x, z, pose)
            else:
                raise TypeError(f"unknown script step {step!r}")

    def duration(self) -> float:
        t = 0.0
        x, z = self.start_x, self.start_z
        for step in self.steps:
            if isinstance(step, Walk):
                dist = math.hypot(step.x - x, step.z - z)
                n = max(1, round((dist / step.speed if step.speed > 0 else 0.0) * FRAME_RATE))
                t += n / FRAME_RATE
                x, z = step.x, step.z
            else:
                t += max(1, round(step.duration * FRAME_RATE)) / FRAME_RATE
        return t


@dataclass(frozen=True)
class CorpusSpec:
    instances_per_gesture: int = 20
    noise_sigma: float = 0.02
    dropout_prob: float = 0.05
    hold_range: tuple[float, float] = (2.2, 3.5)
    delusive_hold_range: tuple[float, float] = (2.8, 3.2)
    walk_x_range: tuple[float, float] = (0.8, 5.2)
    walk_z_range: tuple[float, float] = (1.0, 2.5)
    walk_speed: float = 0.5
    settle: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.dropout_prob <= 1.0):
            raise ValueError("dropout_prob must lie in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.instances_per_gesture < 1:
            raise ValueError("instances_per_gesture must be >= 1")


# Corpus instance classes: the toggle posture appears both as Start and
# Stop rows; which one a given instance is depends on its position among
# the toggles after shuffling (odd toggles start, even toggles stop).
INSTANCE_KINDS = ("toggle", "toggle", "blackboard", "canvas", "speaker", "delusive")


def build_corpus_script(
    spec: CorpusSpec, rng: random.Random
) -> tuple[SpeakerScript, list[tuple[str, str, float]]]:
    """Scripted session interleaving all gesture instances along a walk.

    Returns the script plus, per instance, (kind, pose_name, hold_duration)
    in time order.
    """
    kinds = []
    for kind in INSTANCE_KINDS:
        kinds.extend([kind] * spec.instances_per_gesture)
    rng.shuffle(kinds)

    script = SpeakerScript(
        start_x=rng.uniform(*spec.walk_x_range), start_z=rng.uniform(*spec.walk_z_range)
    )
    plan: list[tuple[str, str, float]] = []
    delusive_cycle = 0
    for kind in kinds:
        script.steps.append(
            Walk(
                x=rng.uniform(*spec.walk_x_range),
                z=rng.uniform(*spec.walk_z_range),
                speed=spec.walk_speed,
            )
        )
        script.steps.append(Stand(spec.settle))
        if kind == "delusive":
            pose = DELUSIVE_POSES[delusive_cycle % len(DELUSIVE_POSES)]
            delusive_cycle += 1
            hold = rng.uniform(*spec.delusive_hold_range)
        else:
            pose = "toggle-record" if kind == "toggle" else kind
            hold = rng.uniform(*spec.hold_range)
        script.steps.append(Hold(pose, hold))
        script.steps.append(Stand(spec.settle))
        plan.append((kind, pose, hold))
    return script, plan


def render_script(
    script: SpeakerScript,
    rng: random.Random | None = None,
    sigma: float = 0.0,
    dropout: float = 0.0,
    s1: Rig | None = None,
    cfg: GestureConfig | None = None,
) -> tuple[Trace, list[TruthWindow]]:
    """Render a script from a fixed sensor pose into a trace plus truth windows."""
    cfg = cfg or GestureConfig()
    s1 = s1 or _home_rig()
    frames = []
    windows: list[TruthWindow] = []
    current_pose = "neutral"
    pose_start = 0.0
    last_t = 0.0
    toggles_seen = 0
    offsets_cache: dict[str, dict] = {}

    def close_window(stop_t: float):
        nonlocal toggles_seen
        if current_pose == "neutral":
            return
        if current_pose == "toggle-record":
            toggles_seen += 1
            truth = TruthClass.START if toggles_seen % 2 == 1 else TruthClass.STOP
        elif current_pose.startswith("delusive"):
            truth = TruthClass.UNDEFINED
        else:
            truth = TruthClass(current_pose)
        windows.append(TruthWindow(start=pose_start, stop=stop_t, truth=truth, pose=current_pose))

    for t, x, z, pose in script.states(FRAME_RATE):
        if pose != current_pose:
            close_window(last_t)
            current_pose = pose
            pose_start = t
        if pose not in offsets_cache:
            offsets_cache[pose] = pose_offsets(pose, cfg)
        frames.append(
            make_frame(t, x, z, offsets_cache[pose], s1, rng=rng, sigma=sigma, dropout=dropout)
        )
        last_t = t
    close_window(last_t)
    return Trace(frames=frames, nominal_rate=FRAME_RATE), windows


def generate_corpus(
    spec: CorpusSpec, seed: int, cfg: GestureConfig | None = None
) -> tuple[Trace, list[TruthWindow]]:
    """Deterministic gesture corpus: same (spec, seed) gives an identical trace."""
    rng = random.Random(seed)
    script, _ = build_corpus_script(spec, rng)
    return render_script(
        script, rng=rng, sigma=spec.noise_sigma, dropout=spec.dropout_prob, cfg=cfg
    )


def tracking_walk_script(
    width: float = 6.0, z: float = 1.0, speed: float = 0.5, margin: float = 0.5
) -> SpeakerScript:
    """Open the recorder, then pace the full front wall both ways."""
    return SpeakerScript(
        start_x=margin,
        start_z=z,
        steps=[
            Stand(0.5),
            Hold("toggle-record", 2.5),
            Stand(0.5),
            Walk(width - margin, z, speed),
            Walk(margin, z, speed),
            Stand(0.5),
        ],
    )
