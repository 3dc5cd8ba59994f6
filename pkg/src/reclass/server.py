"""Live control endpoint: one websocket per session, JSON-lines messages.

Each connection owns an independent simulator fed by a scripted live
speaker. Clients inject poses, drag the speaker around the room, and
step or free-run simulated time; the server echoes authoritative state
(skeleton, rig orientations, LED panel, gestures, EDL) after every
advance. Time only moves on ``step`` commands or while free-running, so
scripted sessions are exactly reproducible.
"""
from __future__ import annotations

import asyncio
import contextlib
import random
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import SystemConfig
from .corpus import FRAME_RATE, pose_offsets, make_frame, COMMAND_POSES, DELUSIVE_POSES
from .director import Presets, speaker_anchor
from .gesture import PoseLabel
from .protocol import decode_ui, ui_error, ProtocolError
from .rig import sensor_to_room
from .sim import Simulator
from .skeleton import SkeletonFrame, Trace, parse_trace, resample

STEP_DEFAULT = 1.0 / FRAME_RATE
POSES = COMMAND_POSES + DELUSIVE_POSES + ("neutral",)


@dataclass
class LiveSource:
    """Speaker model drivable from the UI: position plus a timed pose."""

    x: float = 3.0
    z: float = 1.5
    pose: str = "neutral"
    pose_until: float = 0.0
    room_w: float = 6.0
    room_d: float = 10.0

    def set_position(self, x: float, z: float):
        self.x = min(max(x, 0.0), self.room_w)
        self.z = min(max(z, 0.0), self.room_d)

    def set_pose(self, name: str, duration: float, now: float):
        self.pose = name
        self.pose_until = now + duration

    def state_at(self, t: float) -> tuple[float, float, str]:
        pose = self.pose if t <= self.pose_until + 1e-9 else "neutral"
        return (self.x, self.z, pose)


class SessionRuntime:
    """One simulator plus its live speaker and frame bookkeeping."""

    def __init__(self, config: SystemConfig | None = None, seed: int = 0):
        self.config = config or SystemConfig()
        self.sim = Simulator(self.config)
        self.source = LiveSource(room_w=self.config.room.width, room_d=self.config.room.depth)
        self.rng = random.Random(seed)
        self.sigma = 0.0
        self.dropout = 0.0
        self.trace_frames: list[SkeletonFrame] | None = None
        self.trace_pos = 0
        self.frame_no = 0
        self.last_frame: SkeletonFrame | None = None
        self._offsets_cache: dict[str, dict] = {}
        self._gesture_cursor = 0

    def load_trace(self, text: str):
        trace = parse_trace(text.encode("ascii"))
        if trace.frames:
            base = self.sim.clock
            frames = resample(trace, FRAME_RATE).frames
            shifted = []
            for fr in frames:
                shifted.append(SkeletonFrame(t=base + fr.t, joints=fr.joints, person_present=fr.person_present))
            self.trace_frames = shifted
        else:
            self.trace_frames = []
        self.trace_pos = 0

    def _next_frame_t(self) -> float | None:
        if self.trace_frames is not None:
            if self.trace_pos < len(self.trace_frames):
                return self.trace_frames[self.trace_pos].t
            return None
        return self.frame_no / FRAME_RATE

    def _provide(self, t: float) -> SkeletonFrame:
        if self.trace_frames is not None:
            frame = self.trace_frames[self.trace_pos]
            self.trace_pos += 1
        else:
            x, z, pose = self.source.state_at(t)
            if pose not in self._offsets_cache:
                self._offsets_cache[pose] = pose_offsets(pose, self.config.gesture)
            frame = make_frame(
                t, x, z, self._offsets_cache[pose], self.sim.s1,
                rng=self.rng, sigma=self.sigma, dropout=self.dropout,
            )
        self.frame_no += 1
        self.last_frame = frame
        return frame

    def advance(self, seconds: float) -> list[dict]:
        """Step simulated time and return the authoritative update messages."""
        target = self.sim.clock + max(0.0, seconds)
        self.sim.step_to(target, self._next_frame_t, self._provide)
        return self.snapshot_messages()

    def snapshot_messages(self) -> list[dict]:
        messages: list[dict] = []
        gestures = self.sim.logs.gestures
        while self._gesture_cursor < len(gestures):
            ev = gestures[self._gesture_cursor]
            self._gesture_cursor += 1
            messages.append(
                {
                    "type": "gesture",
                    "label": ev.label.value,
                    "fired_at": ev.fired_at,
                    "held_for": ev.held_for,
                }
            )
        if self.last_frame is not None:
            fr = self.last_frame
            room, _ = speaker_anchor(fr, self.sim.s1)
            messages.append(
                {
                    "type": "skeleton",
                    "t": fr.t,
                    "present": fr.person_present,
                    "speaker_room": list(room),
                    "joints": {
                        j.id.value: [j.position[0], j.position[1], j.position[2], j.track.value]
                        for j in fr.joints
                    },
                }
            )
        messages.append(self.rig_message())
        messages.append(self.led_message())
        messages.append(self.edl_message())
        return messages

    def rig_message(self) -> dict:
        s1, s2 = self.sim.s1, self.sim.s2
        return {
            "type": "rig",
            "t": self.sim.clock,
            "s1": {
                "azimuth": s1.azimuth,
                "elevation": s1.elevation,
                "pan_state": s1.pan.state.value,
                "mount": list(s1.geometry.mount_position),
                "fov_h": s1.geometry.fov_h,
            },
            "s2": {
                "azimuth": s2.azimuth,
                "elevation": s2.elevation,
                "pan_state": s2.pan.state.value,
                "tilt_state": s2.tilt.state.value,
                "mount": list(s2.geometry.mount_position),
                "fov_h": s2.geometry.fov_h,
            },
        }

    def led_message(self) -> dict:
        panel = self.sim.panel
        timer = self.sim.timer
        progress = 0.0
        if timer.hold_start is not None and timer.label is not PoseLabel.UNDEFINED:
            progress = min(1.0, timer.elapsed() / timer.cfg.hold_min)
        return {
            "type": "led",
            "t": self.sim.clock,
            "power": panel.power,
            "command_window": panel.command_window,
            "follow": panel.follow,
            "blackboard": panel.blackboard,
            "canvas": panel.canvas,
            "mask": panel.mask(),
            "hold_label": timer.label.value,
            "hold_progress": progress,
        }

    def edl_message(self) -> dict:
        segments = [
            {"start": seg.start, "stop": seg.stop, "ticks": len(seg.ticks)}
            for seg in self.sim.edl.segments
        ]
        return {
            "type": "edl",
            "recording": self.sim.edl.recording(),
            "segments": segments,
        }

    def handle(self, message: dict) -> tuple[list[dict], float]:
        """Apply one client message; returns (replies, seconds_to_advance)."""
        kind = message.get("type")
        if kind == "pose":
            name = message.get("name")
            if name not in POSES:
                return ([ui_error(f"unknown pose {name!r}")], 0.0)
            duration = float(message.get("duration", 2.5))
            self.source.set_pose(name, duration, self.sim.clock)
            return ([], 0.0)
        if kind == "command":
            action = message.get("action")
            if action == "speaker":
                self.source.set_position(float(message["x"]), float(message["z"]))
                return ([], 0.0)
            if action == "step":
                return ([], float(message.get("seconds", STEP_DEFAULT)))
            if action == "load_trace":
                try:
                    self.load_trace(message.get("text", ""))
                except ValueError as exc:
                    return ([ui_error(str(exc))], 0.0)
                return ([], 0.0)
            if action == "set_preset":
                name = message.get("name")
                az = float(message.get("azimuth", 0.0))
                el = float(message.get("elevation", 0.0))
                presets = self.config.presets
                if name == "blackboard":
                    self.config.presets = Presets(blackboard=(az, el), canvas=presets.canvas)
                elif name == "canvas":
                    self.config.presets = Presets(blackboard=presets.blackboard, canvas=(az, el))
                else:
                    return ([ui_error(f"unknown preset {name!r}")], 0.0)
                return ([], 0.0)
            if action in ("start", "stop"):
                return ([], 0.0)  # free-run toggling handled by the socket loop
            return ([ui_error(f"unknown command action {action!r}")], 0.0)
        return ([ui_error(f"unknown ui message type {kind!r}")], 0.0)


def create_app(config: SystemConfig | None = None, realtime_rate: float = 1.0) -> FastAPI:
    app = FastAPI(title="reclass control endpoint")
    app.state.config = config

    @app.websocket("/ws")
    async def ws_endpoint(socket: WebSocket):
        await socket.accept()
        runtime = SessionRuntime(app.state.config)
        running = False
        run_task: asyncio.Task | None = None

        async def send_all(messages: list[dict]):
            for msg in messages:
                await socket.send_json(msg)

        async def free_run():
            slice_s = 0.1
            try:
                while True:
                    await asyncio.sleep(slice_s / realtime_rate)
                    await send_all(runtime.advance(slice_s))
            except asyncio.CancelledError:
                raise

        await send_all(runtime.snapshot_messages())
        try:
            while True:
                raw = await socket.receive_text()
                try:
                    message = decode_ui(raw)
                except ProtocolError as exc:
                    await socket.send_json(ui_error(str(exc)))
                    continue
                if message.get("type") == "command" and message.get("action") == "start":
                    if not running:
                        running = True
                        run_task = asyncio.create_task(free_run())
                    continue
                if message.get("type") == "command" and message.get("action") == "stop":
                    if run_task is not None:
                        run_task.cancel()
                        with contextlib.suppress(asyncio.CancelledError):
                            await run_task
                        run_task = None
                    running = False
                    await send_all(runtime.snapshot_messages())
                    continue
                replies, advance_s = runtime.handle(message)
                await send_all(replies)
                if advance_s > 0:
                    await send_all(runtime.advance(advance_s))
        except WebSocketDisconnect:
            pass
        finally:
            if run_task is not None:
                run_task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await run_task

    return app


def serve(port: int, config: SystemConfig | None = None):
    import uvicorn

    uvicorn.run(create_app(config), host="127.0.0.1", port=port, log_level="warning")
