"""Pan/tilt rig kinematics and visibility.

Two rigs share this model: the sensor carrier (stepper pan plus the
sensor's internal tilt drive, modelled as a slew-limited servo) and the
camera carrier (stepper pan and stepper tilt). Room frame: x runs along
the front wall, y up, z into the room depth, origin at the front-wall /
floor / left corner. Azimuth 0 faces the front wall (-z); positive
azimuth pans toward +x, positive elevation aims up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .motion import MotionProfile, MotorFsm, MotorGeometry, StepEvent, angle_to_steps, build_profile, steps_to_angle

Vec3 = tuple[float, float, float]

TILT_SERVO_UNIT_DEG = 0.1


@dataclass(frozen=True)
class RigGeometry:
    mount_position: Vec3 = (3.0, 1.2, 4.0)
    pan_motor: MotorGeometry = field(default_factory=MotorGeometry)
    tilt_motor: MotorGeometry | None = field(default_factory=MotorGeometry)
    tilt_slew: float | None = None
    pan_limits: tuple[float, float] = (-170.0, 170.0)
    tilt_limits: tuple[float, float] = (-45.0, 45.0)
    fov_h: float = 57.0
    fov_v: float = 43.0

    def __post_init__(self):
        if self.pan_limits[0] >= self.pan_limits[1] or self.tilt_limits[0] >= self.tilt_limits[1]:
            raise ValueError("angle limits must be well-ordered")
        for fov in (self.fov_h, self.fov_v):
            if not (0.0 < fov < 180.0):
                raise ValueError(f"FOV must lie in (0, 180) degrees, got {fov}")
        if (self.tilt_motor is None) == (self.tilt_slew is None):
            raise ValueError("tilt is either a stepper (tilt_motor) or a servo (tilt_slew)")
        if self.tilt_slew is not None and self.tilt_slew <= 0:
            raise ValueError("tilt_slew must be > 0 deg/s")

    @property
    def servo_tilt(self) -> bool:
        return self.tilt_slew is not None


def sensor_carrier_geometry(**overrides) -> RigGeometry:
    """Default geometry for the sensor rig: stepper pan, internal servo tilt."""
    defaults = dict(
        mount_position=(2.9, 1.2, 4.0),
        tilt_motor=None,
        tilt_slew=10.0,
        fov_h=57.0,
        fov_v=43.0,
        pan_limits=(-85.0, 85.0),
        tilt_limits=(-27.0, 27.0),
    )
    defaults.update(overrides)
    return RigGeometry(**defaults)


def camera_carrier_geometry(**overrides) -> RigGeometry:
    """Default geometry for the camera rig: stepper pan and stepper tilt."""
    defaults = dict(
        mount_position=(3.1, 1.2, 4.0),
        fov_h=60.0,
        fov_v=40.0,
        pan_limits=(-170.0, 170.0),
        tilt_limits=(-45.0, 45.0),
    )
    defaults.update(overrides)
    return RigGeometry(**defaults)


@dataclass
class Rig:
    """Kinematic state of one carrier; motors advance on the shared sim clock."""

    geometry: RigGeometry
    profile: MotionProfile = field(default_factory=build_profile)
    pan: MotorFsm = None
    tilt: MotorFsm | None = None
    tilt_units: int = 0
    tilt_setpoint_units: int = 0
    _tilt_residual: float = 0.0
    clock: float = 0.0

    def __post_init__(self):
        if self.pan is None:
            self.pan = MotorFsm(profile=self.profile, motor=0)
        if self.tilt is None and not self.geometry.servo_tilt:
            self.tilt = MotorFsm(profile=self.profile, motor=1)

    @property
    def azimuth(self) -> float:
        return steps_to_angle(self.pan.position, self.geometry.pan_motor)

    @property
    def elevation(self) -> float:
        if self.geometry.servo_tilt:
            return self.tilt_units * TILT_SERVO_UNIT_DEG
        return steps_to_angle(self.tilt.position, self.geometry.tilt_motor)

    def orientation(self) -> tuple[float, float]:
        return (self.azimuth, self.elevation)

    def _clamp(self, angle: float, limits: tuple[float, float]) -> float:
        return min(max(angle, limits[0]), limits[1])

    def pan_steps_for(self, azimuth: float) -> int:
        """Target step count for an azimuth, never exceeding the pan limits."""
        return clamped_steps(azimuth, self.geometry.pan_motor, self.geometry.pan_limits)

    def tilt_steps_for(self, elevation: float) -> int:
        return clamped_steps(elevation, self.geometry.tilt_motor, self.geometry.tilt_limits)

    def command_pan(self, azimuth: float, now: float):
        self.pan.set_target(self.pan_steps_for(azimuth), now)

    def command_tilt(self, elevation: float, now: float):
        elevation = self._clamp(elevation, self.geometry.tilt_limits)
        if self.geometry.servo_tilt:
            self.tilt_setpoint_units = round(elevation / TILT_SERVO_UNIT_DEG)
        else:
            self.tilt.set_target(self.tilt_steps_for(elevation), now)

    def pan_target_angle(self) -> float:
        return steps_to_angle(self.pan.target, self.geometry.pan_motor)

    def advance(self, dt: float) -> list[StepEvent]:
        """Run motors and the tilt servo forward by dt seconds of sim time."""
        if dt < 0:
            raise ValueError("dt must be >= 0")
        if dt == 0:
            return []
        end = self.clock + dt
        events = self.pan.drain(end)
        if self.tilt is not None:
            events.extend(self.tilt.drain(end))
        if self.geometry.servo_tilt:
            self._slew_tilt(dt)
        self.clock = end
        return sorted(events, key=lambda e: (e.t, e.motor))

    def _slew_tilt(self, dt: float):
        budget = self.geometry.tilt_slew * dt / TILT_SERVO_UNIT_DEG + self._tilt_residual
        delta = self.tilt_setpoint_units - self.tilt_units
        if delta == 0:
            self._tilt_residual = 0.0
            return
        step = min(abs(delta), math.floor(budget))
        self.tilt_units += int(math.copysign(step, delta))
        self._tilt_residual = budget - step if step < abs(delta) else 0.0


def clamped_steps(angle: float, motor: MotorGeometry, limits: tuple[float, float]) -> int:
    """Round an angle to whole steps without ever crossing the limits."""
    lo = math.ceil(limits[0] * motor.gear_ratio / motor.step_angle - 1e-9)
    hi = math.floor(limits[1] * motor.gear_ratio / motor.step_angle + 1e-9)
    steps = angle_to_steps(min(max(angle, limits[0]), limits[1]), motor)
    return min(max(steps, lo), hi)


def bearing_to(geometry: RigGeometry, point: Vec3) -> tuple[float, float]:
    """Azimuth/elevation of a room-frame point as seen from the mount."""
    dx = point[0] - geometry.mount_position[0]
    dy = point[1] - geometry.mount_position[1]
    dz = point[2] - geometry.mount_position[2]
    forward = -dz
    horizontal = math.hypot(dx, forward)
    if horizontal == 0.0 and dy == 0.0:
        raise ValueError("bearing undefined for a point at the mount position")
    azimuth = math.degrees(math.atan2(dx, forward))
    elevation = math.degrees(math.atan2(dy, horizontal))
    return (azimuth, elevation)


def in_fov(rig: Rig, point: Vec3) -> bool:
    az, el = bearing_to(rig.geometry, point)
    return (
        abs(az - rig.azimuth) <= rig.geometry.fov_h / 2.0
        and abs(el - rig.elevation) <= rig.geometry.fov_v / 2.0
    )


def room_to_sensor(rig: Rig, point: Vec3) -> Vec3:
    """Room-frame point into the (possibly rotated) sensor frame of this rig."""
    ax, el = math.radians(rig.azimuth), math.radians(rig.elevation)
    mx, my, mz = rig.geometry.mount_position
    d = (point[0] - mx, point[1] - my, point[2] - mz)
    fh = (math.sin(ax), 0.0, -math.cos(ax))
    rh = (math.cos(ax), 0.0, math.sin(ax))
    fwd = (
        math.cos(el) * fh[0],
        math.sin(el),
        math.cos(el) * fh[2],
    )
    up = (
        -math.sin(el) * fh[0],
        math.cos(el),
        -math.sin(el) * fh[2],
    )
    xs = -(d[0] * rh[0] + d[1] * rh[1] + d[2] * rh[2])
    ys = d[0] * up[0] + d[1] * up[1] + d[2] * up[2]
    zs = d[0] * fwd[0] + d[1] * fwd[1] + d[2] * fwd[2]
    return (xs, ys, zs)


def sensor_to_room(rig: Rig, point: Vec3) -> Vec3:
    """Inverse of room_to_sensor for the rig's current orientation."""
    ax, el = math.radians(rig.azimuth), math.radians(rig.elevation)
    mx, my, mz = rig.geometry.mount_position
    fh = (math.sin(ax), 0.0, -math.cos(ax))
    rh = (math.cos(ax), 0.0, math.sin(ax))
    fwd = (math.cos(el) * fh[0], math.sin(el), math.cos(el) * fh[2])
    up = (-math.sin(el) * fh[0], math.cos(el), -math.sin(el) * fh[2])
    xs, ys, zs = point
    return (
        mx - xs * rh[0] + ys * up[0] + zs * fwd[0],
        my - xs * rh[1] + ys * up[1] + zs * fwd[1],
        mz - xs * rh[2] + ys * up[2] + zs * fwd[2],
    )
