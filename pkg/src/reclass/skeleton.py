"""Skeleton data model and trace-file ingestion.

A skeleton frame carries the 20 named body joints delivered by the 3D
sensor, each with a 3D position in the sensor frame (y up, z forward
from the sensor toward the scene, x completing a right-handed frame,
i.e. toward the viewed person's right) and a per-joint tracking state.
Traces are ordered frame sequences, loadable from a line-oriented text
format and resamplable to an arbitrary uniform rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

POSITION_LIMIT_M = 10.0


class JointId(Enum):
    HEAD = "head"
    SHOULDER_CENTER = "shoulder-center"
    SPINE = "spine"
    HIP_CENTER = "hip-center"
    LEFT_SHOULDER = "left-shoulder"
    LEFT_ELBOW = "left-elbow"
    LEFT_WRIST = "left-wrist"
    LEFT_HAND = "left-hand"
    LEFT_HIP = "left-hip"
    LEFT_KNEE = "left-knee"
    LEFT_ANKLE = "left-ankle"
    LEFT_FOOT = "left-foot"
    RIGHT_SHOULDER = "right-shoulder"
    RIGHT_ELBOW = "right-elbow"
    RIGHT_WRIST = "right-wrist"
    RIGHT_HAND = "right-hand"
    RIGHT_HIP = "right-hip"
    RIGHT_KNEE = "right-knee"
    RIGHT_ANKLE = "right-ankle"
    RIGHT_FOOT = "right-foot"


JOINT_ORDER: tuple[JointId, ...] = tuple(JointId)


class TrackState(Enum):
    NOT_TRACKED = "N"
    INFERRED = "I"
    TRACKED = "T"

    @property
    def rank(self) -> int:
        return _TRACK_RANK[self]


_TRACK_RANK = {TrackState.NOT_TRACKED: 0, TrackState.INFERRED: 1, TrackState.TRACKED: 2}


def weaker(a: TrackState, b: TrackState) -> TrackState:
    """The weaker of two tracking states (NotTracked < Inferred < Tracked)."""
    return a if a.rank <= b.rank else b


class ParseError(ValueError):
    """Malformed trace text. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(ValueError):
    """Structurally parseable input that violates a model invariant."""


@dataclass(frozen=True)
class Joint:
    id: JointId
    position: tuple[float, float, float]
    track: TrackState = TrackState.TRACKED

    def __post_init__(self):
        for c in self.position:
            if not math.isfinite(c):
                raise ValidationError(f"{self.id.value}: non-finite position component")
            if abs(c) > POSITION_LIMIT_M:
                raise ValidationError(
                    f"{self.id.value}: |{c}| exceeds {POSITION_LIMIT_M} m position bound"
                )


@dataclass(frozen=True)
class SkeletonFrame:
    t: float
    joints: tuple[Joint, ...]
    person_present: bool = True
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError(f"negative frame time {self.t}")
        ids = [j.id for j in self.joints]
        if len(ids) != len(JOINT_ORDER) or set(ids) != set(JOINT_ORDER):
            raise ValidationError("frame must contain each of the 20 joints exactly once")
        object.__setattr__(self, "_by_id", {j.id: j for j in self.joints})

    def joint(self, jid: JointId) -> Joint:
        return self._by_id[jid]


def joint_of(frame: SkeletonFrame, jid: JointId) -> Joint:
    """The unique joint with the given id (total: frame invariants guarantee presence)."""
    return frame.joint(jid)


@dataclass
class Trace:
    frames: list[SkeletonFrame] = field(default_factory=list)
    nominal_rate: float = 30.0

    def __post_init__(self):
        if self.nominal_rate <= 0:
            raise ValidationError(f"nominal_rate must be > 0, got {self.nominal_rate}")
        for prev, cur in zip(self.frames, self.frames[1:]):
            if cur.t <= prev.t:
                raise ValidationError(
                    f"timestamps must be strictly increasing (t={cur.t} after t={prev.t})"
                )

    def __len__(self) -> int:
        return len(self.frames)


TRACE_HEADER_PREFIX = "#reclass-trace v1"


def _format_float(x: float) -> str:
    return repr(float(x))


def serialize_trace(trace: Trace) -> bytes:
    lines = [f"{TRACE_HEADER_PREFIX} rate={_format_float(trace.nominal_rate)} frame=y-up-z-forward"]
    for fr in trace.frames:
        parts = [f"t={_format_float(fr.t)}", f"present={1 if fr.person_present else 0}"]
        for jid in JOINT_ORDER:
            j = fr.joint(jid)
            x, y, z = j.position
            parts.append(
                f"{jid.value}:{_format_float(x)},{_format_float(y)},{_format_float(z)},{j.track.value}"
            )
        lines.append(" ".join(parts))
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_trace(data: bytes) -> Trace:
    """Parse the line-oriented trace format; raises ParseError / ValidationError."""
    text = data.decode("ascii", errors="replace")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        return Trace(frames=[], nominal_rate=30.0)
    header = lines[0].strip()
    if not header.startswith(TRACE_HEADER_PREFIX):
        raise ParseError(1, f"missing header {TRACE_HEADER_PREFIX!r}")
    rate = 30.0
    for tok in header.split()[2:]:
        if tok.startswith("rate="):
            try:
                rate = float(tok[5:])
            except ValueError:
                raise ParseError(1, f"bad rate {tok!r}") from None
    frames: list[SkeletonFrame] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        frames.append(_parse_frame_line(line, line_no))
    return Trace(frames=frames, nominal_rate=rate)


def _parse_frame_line(line: str, line_no: int) -> SkeletonFrame:
    parts = line.split()
    if len(parts) != 2 + len(JOINT_ORDER):
        raise ParseError(line_no, f"expected {2 + len(JOINT_ORDER)} fields, got {len(parts)}")
    if not parts[0].startswith("t=") or not parts[1].startswith("present="):
        raise ParseError(line_no, "frame line must begin with t=<sec> present=<0|1>")
    try:
        t = float(parts[0][2:])
    except ValueError:
        raise ParseError(line_no, f"bad timestamp {parts[0]!r}") from None
    present_tok = parts[1][8:]
    if present_tok not in ("0", "1"):
        raise ParseError(line_no, f"present must be 0 or 1, got {present_tok!r}")
    joints = []
    for tok in parts[2:]:
        name, _, rest = tok.partition(":")
        try:
            jid = JointId(name)
        except ValueError:
            raise ParseError(line_no, f"unknown joint {name!r}") from None
        fields = rest.split(",")
        if len(fields) != 4:
            raise ParseError(line_no, f"joint {name}: expected x,y,z,state")
        try:
            x, y, z = (float(fields[0]), float(fields[1]), float(fields[2]))
        except ValueError:
            raise ParseError(line_no, f"joint {name}: bad coordinate") from None
        try:
            track = TrackState(fields[3])
        except ValueError:
            raise ParseError(line_no, f"joint {name}: bad track state {fields[3]!r}") from None
        try:
            joints.append(Joint(jid, (x, y, z), track))
        except ValidationError as exc:
            raise ParseError(line_no, str(exc)) from None
    try:
        return SkeletonFrame(t=t, joints=tuple(joints), person_present=present_tok == "1")
    except ValidationError as exc:
        raise ParseError(line_no, str(exc)) from None


def _lerp(a: float, b: float, u: float) -> float:
    return a + (b - a) * u


def resample(trace: Trace, rate: float) -> Trace:
    """Resample to uniform spacing 1/rate over [t_first, t_last].

    Joint positions interpolate linearly; the track state of an
    interpolated joint is the weaker of the two bracketing states.
    """
    if rate <= 0:
        raise ValidationError(f"rate must be > 0, got {rate}")
    if not trace.frames:
        raise ValidationError("cannot resample an empty trace")
    t0 = trace.frames[0].t
    t1 = trace.frames[-1].t
    n_out = int(math.floor((t1 - t0) * rate + 1e-9)) + 1
    out: list[SkeletonFrame] = []
    idx = 0
    for k in range(n_out):
        t = t0 + k / rate
        while idx + 1 < len(trace.frames) and trace.frames[idx + 1].t <= t + 1e-12:
            idx += 1
        lo = trace.frames[idx]
        if abs(lo.t - t) <= 1e-12 or idx + 1 >= len(trace.frames):
            out.append(SkeletonFrame(t=t, joints=lo.joints, person_present=lo.person_present))
            continue
        hi = trace.frames[idx + 1]
        u = (t - lo.t) / (hi.t - lo.t)
        joints = []
        for jid in JOINT_ORDER:
            a, b = lo.joint(jid), hi.joint(jid)
            pos = (
                _lerp(a.position[0], b.position[0], u),
                _lerp(a.position[1], b.position[1], u),
                _lerp(a.position[2], b.position[2], u),
            )
            joints.append(Joint(jid, pos, weaker(a.track, b.track)))
        out.append(
            SkeletonFrame(
                t=t,
                joints=tuple(joints),
                person_present=lo.person_present and hi.person_present,
            )
        )
    return Trace(frames=out, nominal_rate=rate)
