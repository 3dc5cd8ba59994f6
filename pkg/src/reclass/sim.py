"""Deterministic end-to-end simulation: a 1 ms motion clock, 30 Hz
skeleton delivery, and the 25 fps session logger, wired together exactly
as the live system is.

Every motor command travels through the wire codec into a virtual
controller that owns the three steppers, so the byte protocol is
exercised (and logged) on every run. Within a tick, due events are
applied in timestamp order. Identical inputs give byte-identical wire
logs and EDL exports.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from . import protocol
from .config import SystemConfig
from .corpus import FRAME_RATE, SpeakerScript, make_frame, pose_offsets
from .director import (
    DirectorState,
    LedPanel,
    RecorderAction,
    RigCommand,
    led_state,
    on_gesture,
    on_skeleton,
    speaker_anchor,
)
from .gesture import GestureEvent, HoldTimer
from .motion import MotorFsm, StepEvent, angle_to_steps
from .protocol import Command, ControlFrame, FrameDecoder, encode
from .rig import Rig, bearing_to, in_fov
from .session import SceneTick, SessionEDL, export_edl
from .skeleton import SkeletonFrame, Trace, resample

MOTION_DT = 0.001
MOTOR_S1_PAN = 0
MOTOR_S2_PAN = 1
MOTOR_S2_TILT = 2

FSM_STATE_CODE = {"stopped": 0, "ramp-up": 1, "cruise": 2, "ramp-down": 3}


class VirtualController:
    """Firmware stand-in: consumes wire bytes, drives the three steppers."""

    def __init__(self, motors: dict[int, MotorFsm]):
        self.motors = motors
        self.decoder = FrameDecoder()
        self.led_mask = 0
        self.replies: list[ControlFrame] = []
        self.errors = 0

    def feed(self, data: bytes, now: float):
        for frame in self.decoder.feed(data):
            self.apply(frame, now)

    def apply(self, frame: ControlFrame, now: float):
        cmd = frame.command
        if cmd is Command.MOVE_ABS:
            self.motors[frame.motor].set_target(frame.payload[0], now)
        elif cmd is Command.MOVE_REL:
            m = self.motors[frame.motor]
            m.set_target(m.target + frame.payload[0], now)
        elif cmd is Command.STOP:
            m = self.motors[frame.motor]
            m.set_target(m.position, now)
        elif cmd is Command.SET_PROFILE:
            pass  # profile swaps are applied host-side before a run
        elif cmd is Command.LED_SET:
            self.led_mask = frame.payload[0]
        elif cmd is Command.STATUS_REQ:
            m = self.motors[frame.motor]
            self.replies.append(
                protocol.status(frame.motor, m.position, FSM_STATE_CODE[m.state.value])
            )
        else:
            self.errors += 1


@dataclass
class SimLogs:
    wire: bytearray = field(default_factory=bytearray)
    frames_sent: list[ControlFrame] = field(default_factory=list)
    gestures: list[GestureEvent] = field(default_factory=list)
    led_history: list[tuple[float, int]] = field(default_factory=list)
    steps: list[StepEvent] = field(default_factory=list)
    # tracking rows: (t, s1 bearing error deg, s1 azimuth deg)
    tracking: list[tuple[float, float, float]] = field(default_factory=list)


FrameProvider = Callable[[float], SkeletonFrame]
"""Maps a due skeleton time to the frame delivered at that time."""


class Simulator:
    """Single-owner tick loop over rigs, gesture timer, director, and EDL."""

    def __init__(self, config: SystemConfig | None = None):
        self.config = config or SystemConfig()
        profile = self.config.profile
        self.s1 = Rig(
            geometry=self.config.s1,
            profile=profile,
            pan=MotorFsm(profile=profile, motor=MOTOR_S1_PAN),
        )
        self.s2 = Rig(
            geometry=self.config.s2,
            profile=profile,
            pan=MotorFsm(profile=profile, motor=MOTOR_S2_PAN),
            tilt=MotorFsm(profile=profile, motor=MOTOR_S2_TILT),
        )
        self.controller = VirtualController(
            motors={
                MOTOR_S1_PAN: self.s1.pan,
                MOTOR_S2_PAN: self.s2.pan,
                MOTOR_S2_TILT: self.s2.tilt,
            }
        )
        self.director = DirectorState(
            deadband=self.config.deadband, retarget_interval=self.config.retarget_interval
        )
        self.timer = HoldTimer(cfg=self.config.gesture)
        self.edl = SessionEDL()
        self.logs = SimLogs()
        self.panel = led_state(self.director, hint=False)
        self.clock = 0.0
        self.tick_no = 0
        self.frame_count = 0
        self._speaker_room: tuple[float, float, float] | None = None
        self._send_led(self.panel, 0.0)

    # --- wire helpers ---

    def _send(self, frame: ControlFrame, now: float):
        data = encode(frame)
        self.logs.wire.extend(data)
        self.logs.frames_sent.append(frame)
        self.controller.feed(data, now)

    def _send_led(self, panel: LedPanel, now: float):
        mask = panel.mask()
        if self.logs.led_history and self.logs.led_history[-1][1] == mask:
            return
        self.logs.led_history.append((now, mask))
        self._send(protocol.led_set(mask), now)

    def _dispatch(self, command: RigCommand, now: float):
        rig = self.s1 if command.rig == "s1" else self.s2
        if command.azimuth is not None:
            self._send(protocol.move_abs(rig.pan.motor, rig.pan_steps_for(command.azimuth)), now)
        if command.elevation is not None:
            if rig.geometry.servo_tilt:
                rig.command_tilt(command.elevation, now)
            else:
                self._send(
                    protocol.move_abs(rig.tilt.motor, rig.tilt_steps_for(command.elevation)), now
                )

    # --- event processing ---

    def _process_frame(self, frame: SkeletonFrame):
        self.frame_count += 1
        event = self.timer.update(frame)
        if event is not None:
            self.logs.gestures.append(event)
            self.director, commands, _, action = on_gesture(
                self.director, event, self.config.presets
            )
            for cmd in commands:
                self._dispatch(cmd, frame.t)
            self._apply_recorder(action)
        for cmd in on_skeleton(self.director, frame, self.s1, self.s2):
            self._dispatch(cmd, frame.t)
        self.panel = led_state(self.director, hint=self.timer.led_hint())
        self._send_led(self.panel, frame.t)
        if frame.person_present:
            torso_room, _ = speaker_anchor(frame, self.s1)
            self._speaker_room = torso_room
            az, _ = bearing_to(self.s1.geometry, torso_room)
            self.logs.tracking.append((frame.t, az - self.s1.azimuth, self.s1.azimuth))

    def _apply_recorder(self, action: RecorderAction | None):
        if action is None:
            return
        if action.start:
            self.edl.start_segment(action.at)
        else:
            self.edl.stop_segment(action.at)

    def _log_scene(self, t: float):
        speaker_visible = self._speaker_room is not None and in_fov(self.s2, self._speaker_room)
        self.edl.log_tick(
            SceneTick(
                t=t,
                mode=self.director.mode,
                s2_azimuth=self.s2.azimuth,
                s2_elevation=self.s2.elevation,
                speaker_in_fov=speaker_visible,
            )
        )

    # --- stepping ---

    def step_to(self, end: float, next_frame_t: Callable[[], float | None], provider: FrameProvider):
        """Advance the sim clock to ``end`` on the 1 ms grid.

        ``next_frame_t`` peeks the next pending skeleton time (None when
        exhausted); ``provider`` renders/returns the frame for that time
        when it falls due. Scene-log grid points and skeleton frames are
        applied in timestamp order, grid first on ties.
        """
        n_end = int(round(end / MOTION_DT))
        for n in range(self.tick_no + 1, n_end + 1):
            t = n * MOTION_DT
            self.logs.steps.extend(self.s1.advance(t - self.s1.clock))
            self.logs.steps.extend(self.s2.advance(t - self.s2.clock))
            while True:
                grid_t = self.edl.next_tick_time()
                frame_t = next_frame_t()
                grid_due = grid_t is not None and grid_t <= t + 1e-9
                frame_due = frame_t is not None and frame_t <= t + 1e-9
                if grid_due and (not frame_due or grid_t <= frame_t):
                    self._log_scene(grid_t)
                elif frame_due:
                    self._process_frame(provider(frame_t))
                else:
                    break
            self.clock = t
            self.tick_no = n

    def run(
        self,
        source: Trace | SpeakerScript,
        duration: float | None = None,
        seed: int = 0,
        sigma: float = 0.0,
        dropout: float = 0.0,
    ) -> SimLogs:
        """Drive the whole scenario; reusable state lives on the instance."""
        if isinstance(source, Trace):
            frames = resample(source, FRAME_RATE).frames if source.frames else []
            queue: Iterator = iter(frames)
            pending = [next(queue, None)]

            def next_frame_t():
                return pending[0].t if pending[0] is not None else None

            def provider(_t: float) -> SkeletonFrame:
                frame = pending[0]
                pending[0] = next(queue, None)
                return frame

            total = duration if duration is not None else (frames[-1].t if frames else 0.0)
        else:
            states = source.states(FRAME_RATE)
            pending = [next(states, None)]
            rng = random.Random(seed)
            offsets_cache: dict[str, dict] = {}

            def next_frame_t():
                return pending[0][0] if pending[0] is not None else None

            def provider(t: float) -> SkeletonFrame:
                _, x, z, pose = pending[0]
                pending[0] = next(states, None)
                if pose not in offsets_cache:
                    offsets_cache[pose] = pose_offsets(pose, self.config.gesture)
                return make_frame(
                    t, x, z, offsets_cache[pose], self.s1, rng=rng, sigma=sigma, dropout=dropout
                )

            total = duration if duration is not None else source.duration()
        self.step_to(total, next_frame_t, provider)
        return self.logs

    def finalize(self) -> bytes:
        """Close any open segment at the current clock and export the EDL."""
        seg = self.edl.open_segment
        if seg is not None:
            stop = self.clock if self.clock > seg.start else seg.start + MOTION_DT
            self.edl.stop_segment(stop)
        return export_edl(self.edl)


def run_scenario(
    config: SystemConfig | None,
    source: Trace | SpeakerScript,
    duration: float | None = None,
    seed: int = 0,
    sigma: float = 0.0,
    dropout: float = 0.0,
) -> tuple[Simulator, SimLogs]:
    """One deterministic end-to-end run; returns the simulator and its logs."""
    sim = Simulator(config)
    logs = sim.run(source, duration=duration, seed=seed, sigma=sigma, dropout=dropout)
    return sim, logs
