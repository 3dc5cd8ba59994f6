import math
import random

import pytest

from reclass.motion import (
    MotionProfile,
    MotorFsm,
    MotorGeometry,
    MotorState,
    build_profile,
    plan_move,
    steps_to_angle,
)


def walk_schedule(schedule, start, motor=None, t0=0.0):
    """Independent schedule walker: replay events, return final position
    and the per-step gap sequence (including the gap from t0 to the
    first step, so from-rest sequences are full palindromes)."""
    position = start
    last_t = t0
    gaps = []
    directions = []
    for ev in schedule.events:
        if motor is not None and ev.motor != motor:
            continue
        assert ev.direction in (-1, 1)
        gap = ev.t - last_t
        assert gap > 0, "event times must strictly increase"
        gaps.append(gap)
        last_t = ev.t
        position += ev.direction
        directions.append(ev.direction)
    return position, gaps, directions


def assert_smooth(gaps, max_ratio):
    for a, b in zip(gaps, gaps[1:]):
        ratio = max(a, b) / min(a, b)
        assert ratio <= max_ratio + 1e-9, f"gap jump {a} -> {b} exceeds table ratio"


def assert_no_unstopped_reversal(schedule, profile):
    # A direction flip must be preceded by a full deceleration: the gap
    # straight before the flip is the slowest table entry on both sides.
    events = schedule.events
    for i in range(1, len(events)):
        if events[i].direction != events[i - 1].direction:
            gap = events[i].t - events[i - 1].t
            assert gap >= profile.table[0] - 1e-9


class TestProfile:
    def test_formula_elementwise(self):
        # Independent evaluation of the logistic delay curve.
        n, v_min, v_max = 64, 100.0, 1000.0
        profile = build_profile(v_min, v_max, n)
        for k in range(n):
            s = 1.0 / (1.0 + math.exp(-8.0 * (k / (n - 1) - 0.5)))
            expected = 1.0 / (v_min + (v_max - v_min) * s)
            if k == 0:
                expected = 1.0 / v_min
            elif k == n - 1:
                expected = 1.0 / v_max
            assert profile.table[k] == pytest.approx(expected, abs=1e-12)

    def test_endpoints_pinned(self):
        profile = build_profile(100.0, 1000.0, 64)
        assert profile.table[0] == pytest.approx(0.010, abs=1e-9)
        assert profile.table[63] == pytest.approx(0.001, abs=1e-9)

    def test_monotone_nonincreasing(self):
        profile = build_profile(100.0, 1000.0, 64)
        for a, b in zip(profile.table, profile.table[1:]):
            assert b <= a + 1e-12

    def test_degenerate_constant(self):
        profile = build_profile(500.0, 500.0, 16)
        assert all(d == pytest.approx(0.002, abs=1e-12) for d in profile.table)

    def test_n2_is_exact_endpoints(self):
        profile = build_profile(100.0, 1000.0, 2)
        assert profile.table == (0.01, 0.001)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            build_profile(0.0, 100.0)
        with pytest.raises(ValueError):
            build_profile(200.0, 100.0)
        with pytest.raises(ValueError):
            build_profile(100.0, 200.0, n=1)

    def test_invariant_enforced_on_construction(self):
        with pytest.raises(ValueError):
            MotionProfile(table=(0.01, 0.02), v_min=100.0, v_max=50.0)


class TestPlanMove:
    def test_no_move_empty_schedule(self):
        fsm = MotorFsm(profile=build_profile())
        schedule = plan_move(fsm, 0)
        assert len(schedule) == 0

    def test_long_move_exact_count_and_symmetry(self):
        profile = build_profile(100.0, 1000.0, 64)
        fsm = MotorFsm(profile=profile)
        schedule = plan_move(fsm, 200)
        position, gaps, directions = walk_schedule(schedule, 0)
        assert position == 200
        assert len(schedule) == 200
        assert all(d == 1 for d in directions)
        # Ramp up, cruise at 1/v_max, ramp down mirroring.
        assert gaps[:64] == pytest.approx(list(profile.table), abs=1e-12)
        cruise = gaps[64 : len(gaps) - 64]
        assert all(g == pytest.approx(0.001, abs=1e-12) for g in cruise)
        assert gaps[-64:] == pytest.approx(list(reversed(profile.table)), abs=1e-12)
        # Full palindrome.
        assert gaps == pytest.approx(list(reversed(gaps)), abs=1e-9)
        assert_smooth(gaps, profile.max_adjacent_ratio())

    def test_short_move_truncated_triangular(self):
        profile = build_profile(100.0, 1000.0, 64)
        fsm = MotorFsm(profile=profile)
        schedule = plan_move(fsm, 10)
        position, gaps, _ = walk_schedule(schedule, 0)
        assert position == 10
        assert len(schedule) == 10
        # Peak speed below v_max.
        assert min(gaps) > 1.0 / 1000.0 + 1e-9
        assert gaps == pytest.approx(list(reversed(gaps)), abs=1e-9)
        assert_smooth(gaps, profile.max_adjacent_ratio())

    def test_single_step(self):
        fsm = MotorFsm(profile=build_profile())
        schedule = plan_move(fsm, 1)
        assert len(schedule) == 1
        assert schedule.events[0].t == pytest.approx(0.01, abs=1e-12)

    def test_negative_direction(self):
        fsm = MotorFsm(profile=build_profile())
        schedule = plan_move(fsm, -150)
        position, gaps, directions = walk_schedule(schedule, 0)
        assert position == -150
        assert all(d == -1 for d in directions)
        assert gaps == pytest.approx(list(reversed(gaps)), abs=1e-9)

    def test_reversal_decelerates_to_stop_first(self):
        profile = build_profile(100.0, 1000.0, 64)
        fsm = MotorFsm(profile=profile)
        # Drive into cruise, then retarget behind.
        fsm.set_target(500, 0.0)
        now = 0.0
        emitted = 0
        while emitted < 150:
            now += 0.0005
            if fsm.tick(now) is not None:
                emitted += 1
        assert fsm.state is MotorState.CRUISE
        schedule = plan_move(fsm, 0)
        assert_no_unstopped_reversal(schedule, profile)
        # First events continue forward while decelerating.
        first_dirs = [ev.direction for ev in schedule.events[:10]]
        assert all(d == 1 for d in first_dirs)
        position, _, _ = walk_schedule(schedule, fsm.position)
        assert position == 0

    def test_randomized_exactness(self, rng):
        # Acceptance-scale randomized check lives in test_acceptance; this
        # is the fast development slice.
        for _ in range(100):
            n = rng.choice([2, 8, 16, 64])
            v_min = rng.uniform(20.0, 400.0)
            v_max = v_min * rng.uniform(1.0, 12.0)
            profile = build_profile(v_min, v_max, n)
            start = rng.randint(-300, 300)
            target = rng.randint(-300, 300)
            fsm = MotorFsm(profile=profile, position=start, target=start)
            schedule = plan_move(fsm, target)
            position, gaps, _ = walk_schedule(schedule, start)
            assert position == target
            assert len(schedule) == abs(target - start)
            assert_smooth(gaps, profile.max_adjacent_ratio())


class TestTick:
    def test_stopped_no_event(self):
        fsm = MotorFsm(profile=build_profile())
        assert fsm.tick(1.0) is None
        assert fsm.state is MotorState.STOPPED

    def test_ramp_reaches_cruise(self):
        profile = build_profile(100.0, 1000.0, 8)
        fsm = MotorFsm(profile=profile)
        fsm.set_target(100, 0.0)
        now = 0.0
        seen_cruise = False
        while fsm.state is not MotorState.STOPPED or fsm.position != 100:
            now += 0.001
            fsm.tick(now)
            if fsm.state is MotorState.CRUISE:
                seen_cruise = True
                assert fsm.ramp_index == profile.n
        assert seen_cruise
        assert fsm.position == 100

    def test_deceleration_point_and_exact_stop(self, rng):
        for _ in range(50):
            profile = build_profile(100.0, 1000.0, rng.choice([4, 16, 64]))
            fsm = MotorFsm(profile=profile)
            target = rng.randint(-120, 120)
            fsm.set_target(target, 0.0)
            now = 0.0
            # Moves of <= 2 steps stop straight from the slowest level.
            went_down = abs(target) <= 2
            for _ in range(100000):
                now += 0.001
                fsm.tick(now)
                if fsm.state is MotorState.RAMP_DOWN:
                    went_down = True
                if fsm.state is MotorState.STOPPED and fsm.position == fsm.target:
                    break
            assert fsm.position == target
            assert fsm.state is MotorState.STOPPED
            assert went_down

    def test_retarget_mid_move_still_arrives(self, rng):
        for _ in range(20):
            profile = build_profile(100.0, 1000.0, 16)
            fsm = MotorFsm(profile=profile)
            fsm.set_target(rng.randint(50, 200), 0.0)
            now = 0.0
            flips = rng.randint(1, 3)
            final = fsm.target
            for _ in range(200000):
                now += 0.001
                fsm.tick(now)
                if flips and rng.random() < 0.01:
                    final = rng.randint(-150, 150)
                    fsm.set_target(final, now)
                    flips -= 1
                if not flips and fsm.state is MotorState.STOPPED and fsm.position == final:
                    break
            assert fsm.position == final
            assert fsm.state is MotorState.STOPPED

    def test_direction_constant_until_stopped(self, rng):
        # Reversal mid-move: all events before the first Stopped keep the
        # original direction.
        profile = build_profile(100.0, 800.0, 32)
        fsm = MotorFsm(profile=profile)
        fsm.set_target(300, 0.0)
        now, events = 0.0, []
        while len(events) < 60:
            now += 0.001
            ev = fsm.tick(now)
            if ev:
                events.append(ev)
        fsm.set_target(-50, now)
        stopped_seen = False
        for _ in range(500000):
            now += 0.001
            ev = fsm.tick(now)
            if fsm.state is MotorState.STOPPED:
                stopped_seen = True
            if ev:
                if not stopped_seen:
                    assert ev.direction == 1
                events.append(ev)
            if fsm.state is MotorState.STOPPED and fsm.position == -50:
                break
        assert fsm.position == -50

    def test_time_regression(self):
        fsm = MotorFsm(profile=build_profile())
        fsm.tick(1.0)
        with pytest.raises(ValueError):
            fsm.tick(0.5)


class TestKinematics:
    def test_zero(self):
        assert steps_to_angle(0, MotorGeometry()) == 0.0

    def test_quarter_turn(self):
        assert steps_to_angle(50, MotorGeometry(step_angle=1.8, gear_ratio=1.0)) == pytest.approx(90.0)

    def test_gear_ratio(self):
        assert steps_to_angle(200, MotorGeometry(step_angle=1.8, gear_ratio=2.0)) == pytest.approx(180.0)
