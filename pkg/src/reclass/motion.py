"""Stepper motion: sigmoid-ramp delay tables, the smooth-speed state
machine, and a tick-driven step scheduler.

A motion profile is a lookup table of inter-step delays running from
1/v_min down to 1/v_max along a logistic curve. The motor state machine
(Stopped / RampUp / Cruise / RampDown) walks that table so that every
move accelerates, cruises, and decelerates symmetrically, arrives at the
target exactly, and never reverses direction without passing through
Stopped. Speed changes between consecutive steps are always a single
table entry, so re-targets mid-move stay smooth too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

SIGMOID_SLOPE = 8.0


@dataclass(frozen=True)
class MotionProfile:
    table: tuple[float, ...]
    v_min: float = 100.0
    v_max: float = 1000.0

    def __post_init__(self):
        n = len(self.table)
        if n < 2:
            raise ValueError("profile table needs at least 2 entries")
        if any(d <= 0 for d in self.table):
            raise ValueError("delays must be strictly positive")
        for a, b in zip(self.table, self.table[1:]):
            if b > a + 1e-12:
                raise ValueError("delays must be monotone nonincreasing")
        if abs(self.table[0] - 1.0 / self.v_min) > 1e-9:
            raise ValueError("table[0] must equal 1/v_min")
        if abs(self.table[-1] - 1.0 / self.v_max) > 1e-9:
            raise ValueError("table[-1] must equal 1/v_max")

    @property
    def n(self) -> int:
        return len(self.table)

    def max_adjacent_ratio(self) -> float:
        """Largest ratio between neighbouring delays; the smoothness bound."""
        return max(a / b for a, b in zip(self.table, self.table[1:]))


def build_profile(v_min: float = 100.0, v_max: float = 1000.0, n: int = 64) -> MotionProfile:
    """Delay table along a logistic speed curve from v_min to v_max, endpoints pinned."""
    if v_min <= 0:
        raise ValueError(f"v_min must be > 0, got {v_min}")
    if v_max < v_min:
        raise ValueError(f"v_max ({v_max}) must be >= v_min ({v_min})")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    delays = []
    for k in range(n):
        s = 1.0 / (1.0 + math.exp(-SIGMOID_SLOPE * (k / (n - 1) - 0.5)))
        v = v_min + (v_max - v_min) * s
        delays.append(1.0 / v)
    delays[0] = 1.0 / v_min
    delays[-1] = 1.0 / v_max
    return MotionProfile(table=tuple(delays), v_min=v_min, v_max=v_max)


@dataclass(frozen=True)
class MotorGeometry:
    step_angle: float = 1.8
    gear_ratio: float = 1.0

    def __post_init__(self):
        if self.step_angle <= 0 or self.gear_ratio <= 0:
            raise ValueError("step_angle and gear_ratio must be > 0")


def steps_to_angle(steps: int, geometry: MotorGeometry) -> float:
    return steps * geometry.step_angle / geometry.gear_ratio


def angle_to_steps(angle: float, geometry: MotorGeometry) -> int:
    return round(angle * geometry.gear_ratio / geometry.step_angle)


class MotorState(Enum):
    STOPPED = "stopped"
    RAMP_UP = "ramp-up"
    CRUISE = "cruise"
    RAMP_DOWN = "ramp-down"


@dataclass(frozen=True)
class StepEvent:
    t: float
    motor: int
    direction: int


@dataclass
class StepSchedule:
    events: list[StepEvent] = field(default_factory=list)

    def gaps(self, motor: int | None = None) -> list[float]:
        times = [e.t for e in self.events if motor is None or e.motor == motor]
        return [b - a for a, b in zip(times, times[1:])]

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class MotorFsm:
    """One stepper, driven by ``tick`` against a monotonic clock.

    ``ramp_index`` counts the speed level of the pending step plus one:
    0 when stopped, N while cruising at full speed. The delay in force
    for the pending step is ``table[ramp_index - 1]``.
    """

    profile: MotionProfile
    motor: int = 0
    position: int = 0
    target: int = 0
    direction: int = 1
    state: MotorState = MotorState.STOPPED
    ramp_index: int = 0
    next_due: float | None = None
    last_now: float | None = None

    @property
    def moving(self) -> bool:
        return self.state is not MotorState.STOPPED

    def set_profile(self, profile: MotionProfile):
        if self.moving:
            raise ValueError("profile can only change while stopped")
        self.profile = profile

    def set_target(self, target: int, now: float):
        self.target = int(target)
        if self.state is MotorState.STOPPED:
            self._arm(now)

    def _arm(self, now: float):
        delta = self.target - self.position
        if delta == 0:
            return
        self.direction = 1 if delta > 0 else -1
        self.state = MotorState.RAMP_UP
        self.ramp_index = 1
        self.next_due = now + self.profile.table[0]

    def _gap_for_level(self, level: int) -> float:
        return self.profile.table[level]

    def _choose_next(self, prev_level: int):
        """Pick the next step's speed level after completing one step."""
        n = self.profile.n
        remaining = (self.target - self.position) * self.direction
        if remaining <= 0:
            # At or past the target (or the target moved behind us):
            # bleed speed off one level per step, then stop. A later tick
            # re-arms from Stopped if the target is still elsewhere, so a
            # reversal always has an observable Stopped state between
            # opposite-direction steps.
            if prev_level == 0:
                self.state = MotorState.STOPPED
                self.ramp_index = 0
                self.next_due = None
                return
            level = prev_level - 1
            self.state = MotorState.RAMP_DOWN
        else:
            level = min(prev_level + 1, n - 1, remaining - 1)
            level = max(level, prev_level - 1, 0)
            if level > prev_level:
                self.state = MotorState.RAMP_UP
            elif level < prev_level:
                self.state = MotorState.RAMP_DOWN
            elif level == n - 1:
                self.state = MotorState.CRUISE
        self.ramp_index = level + 1 if self.state is not MotorState.CRUISE else n
        self.next_due += self._gap_for_level(level)

    def tick(self, now: float) -> StepEvent | None:
        """Emit at most one due step; call repeatedly to drain a time window."""
        if self.last_now is not None and now < self.last_now:
            raise ValueError(f"time regression: {now} after {self.last_now}")
        self.last_now = now
        if self.state is MotorState.STOPPED:
            if self.position != self.target:
                self._arm(now)
            return None
        if self.next_due is None or now < self.next_due:
            return None
        event = StepEvent(t=self.next_due, motor=self.motor, direction=self.direction)
        self.position += self.direction
        prev_level = min(self.ramp_index, self.profile.n) - 1
        self._choose_next(prev_level)
        return event

    def drain(self, now: float) -> list[StepEvent]:
        events = []
        while (ev := self.tick(now)) is not None:
            events.append(ev)
        return events


def plan_move(fsm: MotorFsm, target: int, profile: MotionProfile | None = None) -> StepSchedule:
    """Full step schedule that takes a copy of the motor to the target.

    Times are relative to the start of the plan. The original FSM is
    untouched; the schedule is exactly what ``tick`` would emit.
    """
    sim = replace(fsm)
    if profile is not None and not sim.moving:
        sim.profile = profile
    sim.last_now = None
    if sim.next_due is None and sim.moving:
        raise ValueError("moving FSM must carry a pending due time")
    base = 0.0
    if sim.next_due is not None:
        base = sim.next_due - sim.profile.table[min(sim.ramp_index, sim.profile.n) - 1]
        sim.next_due -= base
    sim.set_target(target, 0.0)
    schedule = StepSchedule()
    now = 0.0
    guard = 0
    while sim.moving or sim.position != sim.target:
        if sim.next_due is not None:
            now = sim.next_due
        ev = sim.tick(now)
        if ev is not None:
            schedule.events.append(ev)
        guard += 1
        if guard > 10_000_000:
            raise RuntimeError("runaway schedule")
    return schedule
