"""Recording-session bookkeeping: segments opened and closed by the
record toggle, a 25 fps scene-metadata track inside each segment, and a
round-trippable text export (the stand-in for the video file).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .director import SceneMode

LOG_RATE = 25.0
GRID_TOLERANCE = 1e-6

EDL_HEADER = "#reclass-edl v1"


@dataclass(frozen=True)
class SceneTick:
    t: float
    mode: SceneMode
    s2_azimuth: float
    s2_elevation: float
    speaker_in_fov: bool


@dataclass
class Segment:
    start: float
    stop: float | None = None
    ticks: list[SceneTick] = field(default_factory=list)

    @property
    def open(self) -> bool:
        return self.stop is None


@dataclass
class SessionEDL:
    segments: list[Segment] = field(default_factory=list)

    @property
    def open_segment(self) -> Segment | None:
        if self.segments and self.segments[-1].open:
            return self.segments[-1]
        return None

    def start_segment(self, t: float):
        if self.open_segment is not None:
            raise ValueError("a segment is already open")
        if self.segments and t <= self.segments[-1].stop:
            raise ValueError(f"segment start {t} not after previous stop {self.segments[-1].stop}")
        self.segments.append(Segment(start=t))

    def stop_segment(self, t: float):
        seg = self.open_segment
        if seg is None:
            raise ValueError("no open segment to stop")
        if t <= seg.start:
            raise ValueError(f"segment stop {t} must be after start {seg.start}")
        seg.stop = t

    def next_tick_time(self) -> float | None:
        """The 25 fps grid time the open segment expects next, if recording.

        Ticks sit at start + k/25 for k >= 1; the segment-opening instant
        itself is a boundary, not a logged tick.
        """
        seg = self.open_segment
        if seg is None:
            return None
        return seg.start + (len(seg.ticks) + 1) / LOG_RATE

    def log_tick(self, tick: SceneTick):
        seg = self.open_segment
        if seg is None:
            raise ValueError("no open segment to log into")
        expected = seg.start + (len(seg.ticks) + 1) / LOG_RATE
        if abs(tick.t - expected) > GRID_TOLERANCE:
            raise ValueError(
                f"tick at {tick.t} off the 25 fps grid (expected {expected})"
            )
        seg.ticks.append(tick)

    def recording(self) -> bool:
        return self.open_segment is not None


def tick_count_for(start: float, stop: float) -> int:
    return round((stop - start) * LOG_RATE)


def _fmt(x: float) -> str:
    return repr(float(x))


def export_edl(edl: SessionEDL) -> bytes:
    if edl.open_segment is not None:
        raise ValueError("cannot export with an open segment")
    lines = [EDL_HEADER]
    for seg in edl.segments:
        lines.append(f"segment start={_fmt(seg.start)} stop={_fmt(seg.stop)}")
        for tk in seg.ticks:
            lines.append(
                f"t={_fmt(tk.t)} mode={tk.mode.value} az={_fmt(tk.s2_azimuth)}"
                f" el={_fmt(tk.s2_elevation)} infov={1 if tk.speaker_in_fov else 0}"
            )
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_edl(data: bytes) -> SessionEDL:
    lines = data.decode("ascii").splitlines()
    if not lines or lines[0].strip() != EDL_HEADER:
        raise ValueError(f"missing header {EDL_HEADER!r}")
    edl = SessionEDL()
    pending_stop: float | None = None

    def close_open():
        nonlocal pending_stop
        if pending_stop is not None:
            edl.stop_segment(pending_stop)
            pending_stop = None

    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("segment "):
            close_open()
            kv = dict(tok.split("=", 1) for tok in line.split()[1:])
            edl.start_segment(float(kv["start"]))
            pending_stop = float(kv["stop"])
        elif line.startswith("t="):
            kv = dict(tok.split("=", 1) for tok in line.split())
            tick = SceneTick(
                t=float(kv["t"]),
                mode=SceneMode(kv["mode"]),
                s2_azimuth=float(kv["az"]),
                s2_elevation=float(kv["el"]),
                speaker_in_fov=kv["infov"] == "1",
            )
            edl.log_tick(tick)
        else:
            raise ValueError(f"line {line_no}: unrecognized line {line!r}")
    close_open()
    return edl
