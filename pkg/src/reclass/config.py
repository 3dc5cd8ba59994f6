"""System configuration file: key=value sections covering the room, both
rigs, the gesture thresholds, the motion profile, the director, and the
install-time presets for the blackboard and canvas shots.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .director import Presets
from .gesture import GestureConfig
from .motion import MotionProfile, MotorGeometry, build_profile
from .rig import RigGeometry, camera_carrier_geometry, sensor_carrier_geometry


@dataclass(frozen=True)
class RoomModel:
    width: float = 6.0
    depth: float = 10.0
    # Front-wall rectangles: (x_min, x_max, y_min, y_max) at z = 0.
    blackboard_extent: tuple[float, float, float, float] = (0.5, 2.5, 0.9, 2.1)
    canvas_extent: tuple[float, float, float, float] = (3.5, 5.5, 1.0, 2.3)

    def __post_init__(self):
        for ext in (self.blackboard_extent, self.canvas_extent):
            x0, x1, y0, y1 = ext
            if not (0 <= x0 < x1 <= self.width) or y0 >= y1:
                raise ValueError(f"extent {ext} must lie inside the front wall")

    def center(self, extent) -> tuple[float, float, float]:
        x0, x1, y0, y1 = extent
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0)


@dataclass
class SystemConfig:
    room: RoomModel = field(default_factory=RoomModel)
    s1: RigGeometry = field(default_factory=sensor_carrier_geometry)
    s2: RigGeometry = field(default_factory=camera_carrier_geometry)
    gesture: GestureConfig = field(default_factory=GestureConfig)
    profile: MotionProfile = field(default_factory=build_profile)
    presets: Presets | None = None
    deadband: float = 5.0
    retarget_interval: float = 0.2

    def __post_init__(self):
        if self.presets is None:
            self.presets = presets_from_room(self.room, self.s2)


def presets_from_room(room: RoomModel, s2: RigGeometry) -> Presets:
    """Aim the camera at the wall-rectangle centers; the install-time calibration."""
    from .rig import bearing_to

    return Presets(
        blackboard=bearing_to(s2, room.center(room.blackboard_extent)),
        canvas=bearing_to(s2, room.center(room.canvas_extent)),
    )


def _vec(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _geometry_from_section(sec, defaults: RigGeometry) -> RigGeometry:
    kwargs = {}
    if "mount" in sec:
        kwargs["mount_position"] = _vec(sec["mount"])
    for key, attr in (("fov_h", "fov_h"), ("fov_v", "fov_v")):
        if key in sec:
            kwargs[attr] = float(sec[key])
    if "pan_limits" in sec:
        kwargs["pan_limits"] = _vec(sec["pan_limits"])
    if "tilt_limits" in sec:
        kwargs["tilt_limits"] = _vec(sec["tilt_limits"])
    if "pan_step_angle" in sec or "pan_gear_ratio" in sec:
        kwargs["pan_motor"] = MotorGeometry(
            step_angle=float(sec.get("pan_step_angle", defaults.pan_motor.step_angle)),
            gear_ratio=float(sec.get("pan_gear_ratio", defaults.pan_motor.gear_ratio)),
        )
    if defaults.servo_tilt:
        kwargs["tilt_motor"] = None
        kwargs["tilt_slew"] = float(sec.get("tilt_slew", defaults.tilt_slew))
    elif "tilt_step_angle" in sec or "tilt_gear_ratio" in sec:
        kwargs["tilt_motor"] = MotorGeometry(
            step_angle=float(sec.get("tilt_step_angle", defaults.tilt_motor.step_angle)),
            gear_ratio=float(sec.get("tilt_gear_ratio", defaults.tilt_motor.gear_ratio)),
        )
    merged = {
        "mount_position": defaults.mount_position,
        "pan_motor": defaults.pan_motor,
        "tilt_motor": defaults.tilt_motor,
        "tilt_slew": defaults.tilt_slew,
        "pan_limits": defaults.pan_limits,
        "tilt_limits": defaults.tilt_limits,
        "fov_h": defaults.fov_h,
        "fov_v": defaults.fov_v,
    }
    merged.update(kwargs)
    return RigGeometry(**merged)


def load_config(text: str) -> SystemConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)

    room_kwargs = {}
    if cp.has_section("room"):
        sec = cp["room"]
        if "width" in sec:
            room_kwargs["width"] = float(sec["width"])
        if "depth" in sec:
            room_kwargs["depth"] = float(sec["depth"])
        if "blackboard" in sec:
            room_kwargs["blackboard_extent"] = _vec(sec["blackboard"])
        if "canvas" in sec:
            room_kwargs["canvas_extent"] = _vec(sec["canvas"])
    room = RoomModel(**room_kwargs)

    s1 = sensor_carrier_geometry()
    if cp.has_section("rig.s1"):
        s1 = _geometry_from_section(cp["rig.s1"], s1)
    s2 = camera_carrier_geometry()
    if cp.has_section("rig.s2"):
        s2 = _geometry_from_section(cp["rig.s2"], s2)

    gesture_kwargs = {}
    if cp.has_section("gesture"):
        sec = cp["gesture"]
        for key in (
            "hold_min",
            "hold_max",
            "occlusion_tolerance",
            "refractory",
            "raise_margin",
            "side_margin",
            "chest_depth",
            "cross_margin",
        ):
            if key in sec:
                gesture_kwargs[key] = float(sec[key])
        if "dropout_tolerance" in sec:
            gesture_kwargs["dropout_tolerance"] = int(sec["dropout_tolerance"])
    gesture = GestureConfig(**gesture_kwargs)

    profile = build_profile()
    if cp.has_section("motion"):
        sec = cp["motion"]
        profile = build_profile(
            v_min=float(sec.get("v_min", 100.0)),
            v_max=float(sec.get("v_max", 1000.0)),
            n=int(sec.get("table_size", 64)),
        )

    presets = None
    if cp.has_section("presets"):
        sec = cp["presets"]
        blackboard = _vec(sec["blackboard"]) if "blackboard" in sec else None
        canvas = _vec(sec["canvas"]) if "canvas" in sec else None
        auto = presets_from_room(room, s2)
        presets = Presets(
            blackboard=blackboard or auto.blackboard,
            canvas=canvas or auto.canvas,
        )

    deadband = 5.0
    retarget_interval = 0.2
    if cp.has_section("director"):
        sec = cp["director"]
        deadband = float(sec.get("deadband", deadband))
        retarget_interval = float(sec.get("retarget_interval", retarget_interval))

    return SystemConfig(
        room=room,
        s1=s1,
        s2=s2,
        gesture=gesture,
        profile=profile,
        presets=presets,
        deadband=deadband,
        retarget_interval=retarget_interval,
    )


def load_config_file(path: str) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(fh.read())


def dump_config(cfg: SystemConfig) -> str:
    cp = configparser.ConfigParser()
    cp["room"] = {
        "width": str(cfg.room.width),
        "depth": str(cfg.room.depth),
        "blackboard": " ".join(str(v) for v in cfg.room.blackboard_extent),
        "canvas": " ".join(str(v) for v in cfg.room.canvas_extent),
    }
    for name, geo in (("rig.s1", cfg.s1), ("rig.s2", cfg.s2)):
        sec = {
            "mount": " ".join(str(v) for v in geo.mount_position),
            "fov_h": str(geo.fov_h),
            "fov_v": str(geo.fov_v),
            "pan_limits": " ".join(str(v) for v in geo.pan_limits),
            "tilt_limits": " ".join(str(v) for v in geo.tilt_limits),
            "pan_step_angle": str(geo.pan_motor.step_angle),
            "pan_gear_ratio": str(geo.pan_motor.gear_ratio),
        }
        if geo.servo_tilt:
            sec["tilt_slew"] = str(geo.tilt_slew)
        else:
            sec["tilt_step_angle"] = str(geo.tilt_motor.step_angle)
            sec["tilt_gear_ratio"] = str(geo.tilt_motor.gear_ratio)
        cp[name] = sec
    cp["gesture"] = {
        "hold_min": str(cfg.gesture.hold_min),
        "hold_max": str(cfg.gesture.hold_max),
        "dropout_tolerance": str(cfg.gesture.dropout_tolerance),
        "occlusion_tolerance": str(cfg.gesture.occlusion_tolerance),
        "refractory": str(cfg.gesture.refractory),
        "raise_margin": str(cfg.gesture.raise_margin),
        "side_margin": str(cfg.gesture.side_margin),
        "chest_depth": str(cfg.gesture.chest_depth),
        "cross_margin": str(cfg.gesture.cross_margin),
    }
    cp["motion"] = {
        "v_min": str(cfg.profile.v_min),
        "v_max": str(cfg.profile.v_max),
        "table_size": str(cfg.profile.n),
    }
    cp["presets"] = {
        "blackboard": " ".join(str(v) for v in cfg.presets.blackboard),
        "canvas": " ".join(str(v) for v in cfg.presets.canvas),
    }
    cp["director"] = {
        "deadband": str(cfg.deadband),
        "retarget_interval": str(cfg.retarget_interval),
    }
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()
