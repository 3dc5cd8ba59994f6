import math
import random

import pytest

from reclass.corpus import COMMAND_POSES, DELUSIVE_POSES, make_frame, pose_offsets
from reclass.gesture import (
    GestureConfig,
    GestureEvent,
    HoldTimer,
    PoseLabel,
    classify_pose,
    occlusion_gate,
)
from reclass.skeleton import JOINT_ORDER, Joint, JointId, SkeletonFrame, TrackState

RATE = 30.0

POSE_TO_LABEL = {
    "toggle-record": PoseLabel.TOGGLE_RECORD,
    "blackboard": PoseLabel.BLACKBOARD,
    "canvas": PoseLabel.CANVAS,
    "speaker": PoseLabel.SPEAKER,
}


def translated(frame, dx, dy, dz):
    joints = tuple(
        Joint(j.id, (j.position[0] + dx, j.position[1] + dy, j.position[2] + dz), j.track)
        for j in frame.joints
    )
    return SkeletonFrame(t=frame.t, joints=joints, person_present=frame.person_present)


def with_track(frame, jid, track):
    joints = tuple(
        Joint(j.id, j.position, track if j.id is jid else j.track) for j in frame.joints
    )
    return SkeletonFrame(t=frame.t, joints=joints, person_present=frame.person_present)


def stream(timer, segments, t0=0.0):
    """Frame-stream oracle driver: run labelled segments through the timer.

    segments: list of (pose_name_or_None, n_frames); None renders an
    occluded frame (left wrist dropped). Returns fired events.
    """
    from reclass.rig import Rig, sensor_carrier_geometry

    rig = Rig(geometry=sensor_carrier_geometry())
    events = []
    k = 0
    for pose, n_frames in segments:
        offsets = pose_offsets(pose or "neutral")
        for _ in range(n_frames):
            t = t0 + k / RATE
            frame = make_frame(t, 3.0, 1.5, offsets, rig)
            if pose is None:
                frame = with_track(frame, JointId.LEFT_WRIST, TrackState.NOT_TRACKED)
            ev = timer.update(frame)
            if ev is not None:
                events.append(ev)
            k += 1
    return events


def held_frames(seconds):
    """Frame count so the pose spans exactly `seconds` first-to-last at 30 Hz."""
    return int(round(seconds * RATE)) + 1


class TestClassify:
    @pytest.mark.parametrize("pose,label", list(POSE_TO_LABEL.items()))
    def test_canonical_poses(self, frame_maker, pose, label):
        assert classify_pose(frame_maker(pose)) is label

    def test_neutral_is_undefined(self, frame_maker):
        assert classify_pose(frame_maker("neutral")) is PoseLabel.UNDEFINED

    @pytest.mark.parametrize("pose", DELUSIVE_POSES)
    def test_delusive_poses_rejected(self, frame_maker, pose):
        assert classify_pose(frame_maker(pose)) is PoseLabel.UNDEFINED

    def test_person_absent_is_undefined(self, frame_maker):
        frame = frame_maker("toggle-record", present=False)
        assert classify_pose(frame) is PoseLabel.UNDEFINED

    def test_occlusion_gate_on_inferred_wrist(self, frame_maker):
        frame = with_track(frame_maker("blackboard"), JointId.LEFT_WRIST, TrackState.INFERRED)
        assert not occlusion_gate(frame)
        assert classify_pose(frame) is PoseLabel.UNDEFINED

    def test_occlusion_gate_requires_all_eight(self, frame_maker):
        for jid in (JointId.HEAD, JointId.SPINE, JointId.HIP_CENTER, JointId.SHOULDER_CENTER,
                    JointId.RIGHT_WRIST, JointId.RIGHT_SHOULDER, JointId.LEFT_SHOULDER):
            frame = with_track(frame_maker("canvas"), jid, TrackState.NOT_TRACKED)
            assert classify_pose(frame) is PoseLabel.UNDEFINED

    def test_untracked_hand_is_ignored(self, frame_maker):
        frame = with_track(frame_maker("canvas"), JointId.LEFT_HAND, TrackState.NOT_TRACKED)
        assert classify_pose(frame) is PoseLabel.CANVAS

    def test_translation_invariance(self, frame_maker, rng):
        for pose in list(POSE_TO_LABEL) + ["neutral"]:
            base = frame_maker(pose)
            expected = classify_pose(base)
            for _ in range(20):
                moved = translated(
                    base, rng.uniform(-2, 2), rng.uniform(-0.5, 0.5), rng.uniform(-2, 2)
                )
                assert classify_pose(moved) is expected

    def test_blackboard_canvas_share_right_wrist(self):
        canvas = pose_offsets("canvas")
        blackboard = pose_offsets("blackboard")
        assert canvas[JointId.RIGHT_WRIST] == blackboard[JointId.RIGHT_WRIST]

    def test_no_pose_stretches_arms_sideways(self):
        for pose in COMMAND_POSES:
            offsets = pose_offsets(pose)
            for wrist, shoulder in (
                (JointId.LEFT_WRIST, JointId.LEFT_SHOULDER),
                (JointId.RIGHT_WRIST, JointId.RIGHT_SHOULDER),
            ):
                wr, _, wf = offsets[wrist]
                sr, _, sf = offsets[shoulder]
                assert math.hypot(wr - sr, wf - sf) < 0.5


class TestHoldTimer:
    def test_short_hold_no_event(self):
        timer = HoldTimer()
        events = stream(timer, [("toggle-record", held_frames(1.9))])
        assert events == []

    def test_exact_hold_fires_once(self):
        timer = HoldTimer()
        events = stream(timer, [("toggle-record", held_frames(2.0))])
        assert len(events) == 1
        assert events[0].label is PoseLabel.TOGGLE_RECORD
        assert events[0].held_for == pytest.approx(2.0, abs=1e-9)

    def test_long_hold_fires_exactly_once_at_two_seconds(self):
        timer = HoldTimer()
        events = stream(timer, [("canvas", held_frames(3.5))])
        assert len(events) == 1
        assert events[0].fired_at == pytest.approx(2.0, abs=1e-9)

    def test_dropout_bridge(self):
        # 1.5 s canvas, 2 occluded frames, 0.6 s canvas: one event, fired
        # once wall time since hold start reaches 2.0 s.
        timer = HoldTimer()
        events = stream(timer, [("canvas", 45), (None, 2), ("canvas", 18)])
        assert len(events) == 1
        assert events[0].label is PoseLabel.CANVAS
        assert events[0].fired_at == pytest.approx(2.0, abs=1e-9)

    def test_occlusion_beyond_tolerance_resets(self):
        timer = HoldTimer()
        gap = int(0.5 * RATE) + 2  # past the 0.5 s occlusion tolerance
        events = stream(timer, [("canvas", 45), (None, gap), ("canvas", 45)])
        assert events == []

    def test_geometric_flicker_bridged(self):
        timer = HoldTimer(cfg=GestureConfig(dropout_tolerance=3))
        events = stream(timer, [("canvas", 30), ("neutral", 3), ("canvas", 40)])
        assert len(events) == 1

    def test_geometric_change_beyond_tolerance_resets(self):
        timer = HoldTimer(cfg=GestureConfig(dropout_tolerance=3))
        events = stream(timer, [("canvas", 30), ("neutral", 8), ("canvas", 45)])
        assert events == []
        events = stream(timer, [("canvas", held_frames(2.0))], t0=10.0)
        assert len(events) == 1

    def test_label_switch_starts_new_hold(self):
        timer = HoldTimer()
        events = stream(timer, [("canvas", 30), ("blackboard", held_frames(2.0) + 4)])
        assert len(events) == 1
        assert events[0].label is PoseLabel.BLACKBOARD

    def test_refractory_blocks_immediate_refire(self):
        timer = HoldTimer()
        events = stream(
            timer,
            [("canvas", held_frames(2.1)), ("neutral", 5), ("canvas", held_frames(2.5))],
        )
        # 5 neutral frames = 0.167 s < 0.5 s refractory: the second canvas
        # hold must not fire.
        assert len(events) == 1

    def test_refire_after_refractory(self):
        timer = HoldTimer()
        events = stream(
            timer,
            [("canvas", held_frames(2.1)), ("neutral", 20), ("canvas", held_frames(2.5))],
        )
        assert len(events) == 2
        assert all(ev.label is PoseLabel.CANVAS for ev in events)

    def test_time_regression_rejected(self, frame_maker):
        timer = HoldTimer()
        timer.update(frame_maker("neutral", t=1.0))
        with pytest.raises(ValueError):
            timer.update(frame_maker("neutral", t=0.5))

    def test_exactly_once_property(self, rng):
        # Random label streams: within any maximal same-label run, at most
        # one event fires, it carries the run's label, and runs spanning
        # less than hold_min never fire.
        for _ in range(30):
            timer = HoldTimer(cfg=GestureConfig(dropout_tolerance=0, refractory=0.2))
            segments = []
            for _ in range(rng.randint(2, 8)):
                pose = rng.choice(list(POSE_TO_LABEL) + ["neutral"])
                segments.append((pose, rng.randint(1, 90)))
            events = stream(timer, segments)
            # Maximal same-pose runs as (pose, first_frame, last_frame).
            runs, k = [], 0
            for pose, n in segments:
                if runs and runs[-1][0] == pose:
                    runs[-1][2] = k + n - 1
                else:
                    runs.append([pose, k, k + n - 1])
                k += n
            for pose, first, last in runs:
                t0, t1 = first / RATE, last / RATE
                inside = [ev for ev in events if t0 <= ev.fired_at <= t1]
                assert len(inside) <= 1
                if pose == "neutral":
                    assert inside == []
                else:
                    assert all(ev.label is POSE_TO_LABEL[pose] for ev in inside)
                    if t1 - t0 < 2.0:
                        assert inside == []
            fire_times = [ev.fired_at for ev in events]
            assert fire_times == sorted(fire_times)


class TestLedHint:
    def test_idle_false(self, frame_maker):
        timer = HoldTimer()
        timer.update(frame_maker("neutral", t=0.0))
        assert timer.led_hint() is False

    def test_mid_hold_true(self):
        timer = HoldTimer()
        stream(timer, [("canvas", held_frames(1.0))])
        assert timer.led_hint() is True

    def test_past_hold_max_false(self):
        timer = HoldTimer()
        events = stream(timer, [("canvas", held_frames(4.5))])
        assert len(events) == 1
        assert timer.led_hint() is False
