import math

import pytest

from reclass.motion import MotorFsm, MotorGeometry, MotorState, build_profile
from reclass.rig import (
    Rig,
    RigGeometry,
    bearing_to,
    camera_carrier_geometry,
    in_fov,
    room_to_sensor,
    sensor_carrier_geometry,
    sensor_to_room,
)


def stepper_rig(**geo_overrides):
    return Rig(geometry=camera_carrier_geometry(**geo_overrides))


def servo_rig(**geo_overrides):
    return Rig(geometry=sensor_carrier_geometry(**geo_overrides))


class TestOrientation:
    def test_home(self):
        rig = stepper_rig()
        assert rig.orientation() == (0.0, 0.0)

    def test_pan_steps_to_azimuth(self):
        rig = stepper_rig()
        rig.pan.position = 50
        assert rig.azimuth == pytest.approx(90.0)

    def test_servo_tilt_units(self):
        rig = servo_rig()
        rig.tilt_units = 135
        assert rig.elevation == pytest.approx(13.5)


class TestBearing:
    def test_boresight(self):
        geo = camera_carrier_geometry(mount_position=(3.0, 1.2, 4.0))
        az, el = bearing_to(geo, (3.0, 1.2, 1.0))
        assert az == pytest.approx(0.0)
        assert el == pytest.approx(0.0)

    def test_left_45(self):
        geo = camera_carrier_geometry(mount_position=(3.0, 1.2, 4.0))
        az, _ = bearing_to(geo, (2.0, 1.2, 3.0))
        assert az == pytest.approx(-45.0)

    def test_elevation_atan_quarter(self):
        geo = camera_carrier_geometry(mount_position=(3.0, 1.2, 4.0))
        _, el = bearing_to(geo, (3.0, 2.2, 0.0))
        assert el == pytest.approx(14.036243467926479, abs=1e-9)

    def test_coincident_point_errors(self):
        geo = camera_carrier_geometry(mount_position=(3.0, 1.2, 4.0))
        with pytest.raises(ValueError):
            bearing_to(geo, (3.0, 1.2, 4.0))

    def test_translation_invariance(self, rng):
        for _ in range(25):
            mount = (rng.uniform(0, 6), rng.uniform(0.5, 2), rng.uniform(1, 9))
            point = (rng.uniform(0, 6), rng.uniform(0, 3), rng.uniform(0, 9))
            if point == mount:
                continue
            geo = camera_carrier_geometry(mount_position=mount)
            ref = bearing_to(geo, point)
            d = (rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-2, 2))
            geo2 = camera_carrier_geometry(
                mount_position=tuple(m + s for m, s in zip(mount, d))
            )
            moved = bearing_to(geo2, tuple(p + s for p, s in zip(point, d)))
            assert moved[0] == pytest.approx(ref[0], abs=1e-9)
            assert moved[1] == pytest.approx(ref[1], abs=1e-9)


class TestFov:
    def test_boresight_visible(self):
        rig = stepper_rig(mount_position=(3.0, 1.2, 4.0))
        assert in_fov(rig, (3.0, 1.2, 1.0))

    def test_outside_horizontal(self):
        rig = servo_rig(mount_position=(3.0, 1.2, 4.0), fov_h=57.0)
        # 40 degrees off against 28.5 half-angle.
        x = 3.0 + 3.0 * math.tan(math.radians(40.0))
        assert not in_fov(rig, (x, 1.2, 1.0))

    def test_boundary_closed(self):
        rig = stepper_rig(mount_position=(3.0, 1.2, 4.0), fov_h=60.0, fov_v=40.0)
        x = 3.0 + 3.0 * math.tan(math.radians(30.0))
        assert in_fov(rig, (x, 1.2, 1.0))


class TestAdvance:
    def test_zero_dt_is_identity(self):
        rig = stepper_rig()
        rig.command_pan(45.0, 0.0)
        before = (rig.pan.position, rig.tilt.position, rig.clock)
        assert rig.advance(0.0) == []
        assert (rig.pan.position, rig.tilt.position, rig.clock) == before

    def test_long_dt_completes_move(self):
        rig = stepper_rig()
        rig.command_pan(90.0, 0.0)  # 50 steps
        events = rig.advance(5.0)
        assert len(events) == 50
        assert rig.pan.state is MotorState.STOPPED
        assert rig.azimuth == pytest.approx(90.0)
        times = [e.t for e in events]
        assert times == sorted(times)

    def test_tilt_slew_clamp(self):
        rig = servo_rig(tilt_slew=5.0)
        rig.command_tilt(10.0, 0.0)
        rig.advance(1.0)
        assert rig.elevation == pytest.approx(5.0)
        rig.advance(1.0)
        assert rig.elevation == pytest.approx(10.0)
        rig.advance(1.0)
        assert rig.elevation == pytest.approx(10.0)

    def test_pan_clamped_to_limits(self):
        rig = stepper_rig(pan_limits=(-30.0, 30.0))
        rig.command_pan(120.0, 0.0)
        rig.advance(10.0)
        assert rig.azimuth <= 30.0 + 1e-9

    def test_continuity_one_step_per_event(self):
        rig = stepper_rig()
        rig.command_pan(36.0, 0.0)  # 20 steps
        last_az = rig.azimuth
        for _ in range(200):
            events = rig.advance(0.01)
            az = rig.azimuth
            step_deg = rig.geometry.pan_motor.step_angle
            assert abs(az - last_az) <= len(events) * step_deg + 1e-9
            last_az = az


class TestFrames:
    def test_room_sensor_roundtrip(self, rng):
        rig = servo_rig(mount_position=(2.9, 1.2, 4.0))
        rig.pan.position = 7
        rig.tilt_units = -40
        for _ in range(30):
            p = (rng.uniform(0, 6), rng.uniform(0, 3), rng.uniform(0, 9))
            q = sensor_to_room(rig, room_to_sensor(rig, p))
            assert q == pytest.approx(p, abs=1e-9)

    def test_person_right_maps_to_positive_x(self):
        # A point toward the viewed person's right (room -x when facing +z)
        # lands at positive sensor x with the rig at home.
        rig = servo_rig(mount_position=(3.0, 1.2, 4.0))
        x, _, _ = room_to_sensor(rig, (2.5, 1.2, 1.0))
        assert x > 0

    def test_sensor_frame_depth(self):
        rig = servo_rig(mount_position=(3.0, 1.2, 4.0))
        _, _, z = room_to_sensor(rig, (3.0, 1.2, 1.0))
        assert z == pytest.approx(3.0)


class TestGeometryValidation:
    def test_fov_bounds(self):
        with pytest.raises(ValueError):
            camera_carrier_geometry(fov_h=0.0)
        with pytest.raises(ValueError):
            camera_carrier_geometry(fov_h=180.0)

    def test_limits_ordering(self):
        with pytest.raises(ValueError):
            camera_carrier_geometry(pan_limits=(10.0, -10.0))

    def test_tilt_mode_exclusive(self):
        with pytest.raises(ValueError):
            RigGeometry(tilt_motor=MotorGeometry(), tilt_slew=5.0)
        with pytest.raises(ValueError):
            RigGeometry(tilt_motor=None, tilt_slew=None)
