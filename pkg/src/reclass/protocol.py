"""Controller-link wire codec and the UI message protocol.

Wire frames: 0xA5 sync, one length byte covering command plus payload,
the command byte, a fixed-length little-endian payload, and a CRC-8
(polynomial 0x07, init 0x00, MSB-first) over everything after the sync
byte. The decoder resynchronizes on the sync byte and drops frames whose
checksum fails, so junk between frames is skipped without losing the
frames around it.

UI messages are JSON objects, one per line, exchanged over a websocket.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

SYNC = 0xA5
CRC_POLY = 0x07
MAX_BODY = 32


class Command(IntEnum):
    MOVE_ABS = 0x01
    MOVE_REL = 0x02
    STOP = 0x03
    SET_PROFILE = 0x04
    LED_SET = 0x05
    STATUS_REQ = 0x06
    STATUS = 0x86


# Payload length per command, in bytes (excluding the command byte).
PAYLOAD_LEN = {
    Command.MOVE_ABS: 3,  # motor u8, steps i16
    Command.MOVE_REL: 3,  # motor u8, steps i16
    Command.STOP: 1,  # motor u8
    Command.SET_PROFILE: 5,  # motor u8, v_min u16, v_max u16
    Command.LED_SET: 1,  # led mask u8 (bit0 power .. bit4 canvas)
    Command.STATUS_REQ: 1,  # motor u8
    Command.STATUS: 4,  # motor u8, position i16, fsm state u8
}

MOTOR_ADDRESSED = {
    Command.MOVE_ABS,
    Command.MOVE_REL,
    Command.STOP,
    Command.SET_PROFILE,
    Command.STATUS_REQ,
    Command.STATUS,
}


class ProtocolError(ValueError):
    pass


class CrcError(ProtocolError):
    pass


def crc8(data: bytes) -> int:
    c = 0x00
    for b in data:
        c ^= b
        for _ in range(8):
            c = ((c << 1) ^ CRC_POLY) & 0xFF if c & 0x80 else (c << 1) & 0xFF
    return c


@dataclass(frozen=True)
class ControlFrame:
    command: Command
    motor: int = 0
    payload: tuple[int, ...] = ()

    def __post_init__(self):
        if self.command in MOTOR_ADDRESSED and not (0 <= self.motor <= 2):
            raise ProtocolError(f"motor must be 0..2, got {self.motor}")


def move_abs(motor: int, steps: int) -> ControlFrame:
    return ControlFrame(Command.MOVE_ABS, motor, (steps,))


def move_rel(motor: int, steps: int) -> ControlFrame:
    return ControlFrame(Command.MOVE_REL, motor, (steps,))


def stop(motor: int) -> ControlFrame:
    return ControlFrame(Command.STOP, motor)


def set_profile(motor: int, v_min: int, v_max: int) -> ControlFrame:
    return ControlFrame(Command.SET_PROFILE, motor, (v_min, v_max))


def led_set(mask: int) -> ControlFrame:
    return ControlFrame(Command.LED_SET, 0, (mask,))


def status_req(motor: int) -> ControlFrame:
    return ControlFrame(Command.STATUS_REQ, motor)


def status(motor: int, position: int, fsm_state: int) -> ControlFrame:
    return ControlFrame(Command.STATUS, motor, (position, fsm_state))


def _i16(value: int) -> bytes:
    if not (-32768 <= value <= 32767):
        raise ProtocolError(f"value {value} out of signed 16-bit range")
    return value.to_bytes(2, "little", signed=True)


def _u16(value: int) -> bytes:
    if not (0 <= value <= 0xFFFF):
        raise ProtocolError(f"value {value} out of unsigned 16-bit range")
    return value.to_bytes(2, "little")


def _u8(value: int) -> bytes:
    if not (0 <= value <= 0xFF):
        raise ProtocolError(f"value {value} out of byte range")
    return bytes([value])


def _encode_payload(frame: ControlFrame) -> bytes:
    c, p = frame.command, frame.payload
    if c in (Command.MOVE_ABS, Command.MOVE_REL):
        return _u8(frame.motor) + _i16(p[0])
    if c is Command.STOP or c is Command.STATUS_REQ:
        return _u8(frame.motor)
    if c is Command.SET_PROFILE:
        return _u8(frame.motor) + _u16(p[0]) + _u16(p[1])
    if c is Command.LED_SET:
        return _u8(p[0])
    if c is Command.STATUS:
        return _u8(frame.motor) + _i16(p[0]) + _u8(p[1])
    raise ProtocolError(f"unknown command {c!r}")


def _decode_payload(command: Command, body: bytes) -> ControlFrame:
    if command in (Command.MOVE_ABS, Command.MOVE_REL):
        return ControlFrame(command, body[0], (int.from_bytes(body[1:3], "little", signed=True),))
    if command is Command.STOP or command is Command.STATUS_REQ:
        return ControlFrame(command, body[0])
    if command is Command.SET_PROFILE:
        return ControlFrame(
            command,
            body[0],
            (int.from_bytes(body[1:3], "little"), int.from_bytes(body[3:5], "little")),
        )
    if command is Command.LED_SET:
        return ControlFrame(command, 0, (body[0],))
    if command is Command.STATUS:
        return ControlFrame(
            command, body[0], (int.from_bytes(body[1:3], "little", signed=True), body[3])
        )
    raise ProtocolError(f"unknown command {command!r}")


def encode(frame: ControlFrame) -> bytes:
    payload = _encode_payload(frame)
    body = bytes([frame.command]) + payload
    if len(payload) != PAYLOAD_LEN[frame.command]:
        raise ProtocolError(
            f"{frame.command.name} payload must be {PAYLOAD_LEN[frame.command]} bytes"
        )
    framed = bytes([len(body)]) + body
    return bytes([SYNC]) + framed + bytes([crc8(framed)])


class FrameDecoder:
    """Streaming decoder: feed bytes, collect frames; resyncs through garbage."""

    def __init__(self):
        self.buf = bytearray()
        self.crc_errors = 0
        self.skipped = 0

    def feed(self, data: bytes) -> list[ControlFrame]:
        self.buf.extend(data)
        frames: list[ControlFrame] = []
        while True:
            frame = self._scan_one(final=False)
            if frame is None:
                break
            frames.append(frame)
        return frames

    def finish(self) -> list[ControlFrame]:
        """Drain the buffer treating the stream as ended (no partial frames pending)."""
        frames: list[ControlFrame] = []
        while True:
            frame = self._scan_one(final=True)
            if frame is None:
                break
            frames.append(frame)
        return frames

    def _scan_one(self, final: bool) -> ControlFrame | None:
        buf = self.buf
        i = 0
        while i < len(buf):
            if buf[i] != SYNC:
                i += 1
                continue
            if i + 1 >= len(buf):
                if final:
                    i += 1
                    continue
                break  # need the length byte
            length = buf[i + 1]
            if not (1 <= length <= MAX_BODY):
                i += 1
                continue
            end = i + 2 + length + 1
            if end > len(buf):
                # Could be an incomplete real frame: wait for more bytes in
                # streaming mode; at end of stream it is junk.
                if final:
                    i += 1
                    continue
                break
            body = bytes(buf[i + 1 : i + 2 + length])
            if crc8(body) != buf[end - 1]:
                self.crc_errors += 1
                i += 1
                continue
            try:
                command = Command(body[1])
            except ValueError:
                i += 1
                continue
            if PAYLOAD_LEN[command] != length - 1:
                i += 1
                continue
            frame = _decode_payload(command, body[2:])
            self.skipped += i
            del buf[:end]
            return frame
        self.skipped += i
        del buf[:i]
        return None


def decode(data: bytes) -> list[ControlFrame]:
    """Decode every valid frame in a byte string, skipping junk."""
    dec = FrameDecoder()
    frames = dec.feed(data)
    frames.extend(dec.finish())
    return frames


def decode_one(data: bytes) -> ControlFrame:
    frames = decode(data)
    if len(frames) != 1:
        raise ProtocolError(f"expected exactly one frame, found {len(frames)}")
    return frames[0]


# --- UI message protocol (JSON lines over a websocket) ---

UI_TYPES = ("skeleton", "pose", "rig", "gesture", "led", "edl", "command", "error")


def encode_ui(message: dict) -> str:
    if message.get("type") not in UI_TYPES:
        raise ProtocolError(f"unknown ui message type {message.get('type')!r}")
    return json.dumps(message, separators=(",", ":"), sort_keys=True) + "\n"


def decode_ui(line: str) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed ui message: {exc}") from None
    if not isinstance(message, dict):
        raise ProtocolError("ui message must be a JSON object")
    if message.get("type") not in UI_TYPES:
        raise ProtocolError(f"unknown ui message type {message.get('type')!r}")
    return message


def ui_error(reason: str) -> dict:
    return {"type": "error", "reason": reason}
