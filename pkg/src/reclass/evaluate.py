"""Recognition scoring: run a trace through the hold timer, assign fired
events to ground-truth windows, and tabulate the confusion matrix with
per-class true-positive rates.

Toggle events have no intrinsic start/stop identity; the scorer tracks
recorder state across every fired toggle (in time order, including
strays) and labels each one Start or Stop by the state it produces, the
same way the live director would.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import TRUTH_ORDER, TruthClass, TruthWindow
from .gesture import GestureConfig, GestureEvent, HoldTimer, PoseLabel
from .skeleton import Trace

CLASS_NAMES = {
    TruthClass.START: "Start",
    TruthClass.STOP: "Stop",
    TruthClass.BLACKBOARD: "Blackboard",
    TruthClass.CANVAS: "Canvas",
    TruthClass.SPEAKER: "Speaker",
    TruthClass.UNDEFINED: "Undefined",
}

EVENT_CLASS = {
    PoseLabel.BLACKBOARD: TruthClass.BLACKBOARD,
    PoseLabel.CANVAS: TruthClass.CANVAS,
    PoseLabel.SPEAKER: TruthClass.SPEAKER,
}


@dataclass
class ConfusionMatrix:
    counts: dict[TruthClass, dict[TruthClass, int]] = field(
        default_factory=lambda: {r: {c: 0 for c in TRUTH_ORDER} for r in TRUTH_ORDER}
    )

    def add(self, performed: TruthClass, recognized: TruthClass):
        self.counts[performed][recognized] += 1

    def row_sum(self, row: TruthClass) -> int:
        return sum(self.counts[row].values())

    def col_sum(self, col: TruthClass) -> int:
        return sum(self.counts[row][col] for row in TRUTH_ORDER)

    def total(self) -> int:
        return sum(self.row_sum(r) for r in TRUTH_ORDER)

    def diagonal(self) -> int:
        return sum(self.counts[c][c] for c in TRUTH_ORDER)

    def as_rows(self) -> list[list[int]]:
        return [[self.counts[r][c] for c in TRUTH_ORDER] for r in TRUTH_ORDER]


@dataclass(frozen=True)
class ClassifiedEvent:
    event: GestureEvent
    recognized: TruthClass


def classify_events(events: list[GestureEvent]) -> list[ClassifiedEvent]:
    """Label toggle events Start/Stop by the recorder state they would produce."""
    out = []
    recording = False
    for ev in events:
        if ev.label is PoseLabel.TOGGLE_RECORD:
            recording = not recording
            out.append(ClassifiedEvent(ev, TruthClass.START if recording else TruthClass.STOP))
        else:
            out.append(ClassifiedEvent(ev, EVENT_CLASS[ev.label]))
    return out


def run_timer(trace: Trace, cfg: GestureConfig | None = None) -> list[GestureEvent]:
    timer = HoldTimer(cfg=cfg or GestureConfig())
    events = []
    for frame in trace.frames:
        ev = timer.update(frame)
        if ev is not None:
            events.append(ev)
    return events


@dataclass
class EvalResult:
    matrix: ConfusionMatrix
    events: list[ClassifiedEvent]
    strays: list[ClassifiedEvent]


def run_eval(
    trace: Trace, truth: list[TruthWindow], cfg: GestureConfig | None = None
) -> EvalResult:
    """Score every ground-truth window by the first event fired inside it."""
    ordered = sorted(truth, key=lambda w: w.start)
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.stop:
            raise ValueError(f"truth windows overlap: {a} and {b}")
    events = classify_events(run_timer(trace, cfg))
    matrix = ConfusionMatrix()
    strays: list[ClassifiedEvent] = []
    used = [False] * len(events)
    for window in ordered:
        recognized = TruthClass.UNDEFINED
        for i, ce in enumerate(events):
            if used[i]:
                continue
            if window.start <= ce.event.fired_at <= window.stop:
                recognized = ce.recognized
                used[i] = True
                break
            if ce.event.fired_at > window.stop:
                break
        matrix.add(window.truth, recognized)
    strays.extend(ce for i, ce in enumerate(events) if not used[i])
    return EvalResult(matrix=matrix, events=events, strays=strays)


def success_rates(matrix: ConfusionMatrix) -> dict[TruthClass, float]:
    """Per-class true-positive rate: diagonal count over row total."""
    rates = {}
    for cls in TRUTH_ORDER:
        total = matrix.row_sum(cls)
        if total == 0:
            raise ValueError(f"empty row for {cls.value}")
        rates[cls] = matrix.counts[cls][cls] / total
    return rates


def matrix_to_csv(matrix: ConfusionMatrix) -> str:
    """Confusion matrix CSV: performed rows, recognized columns, trailing sums."""
    header = ["Gesture"] + [CLASS_NAMES[c] for c in TRUTH_ORDER] + ["Sum"]
    lines = [",".join(header)]
    for row in TRUTH_ORDER:
        cells = [CLASS_NAMES[row]] + [str(matrix.counts[row][c]) for c in TRUTH_ORDER]
        cells.append(str(matrix.row_sum(row)))
        lines.append(",".join(cells))
    sums = ["Sum"] + [str(matrix.col_sum(c)) for c in TRUTH_ORDER] + [str(matrix.total())]
    lines.append(",".join(sums))
    return "\n".join(lines) + "\n"


def rates_to_csv(rates: dict[TruthClass, float]) -> str:
    lines = ["Gesture,SuccessRate"]
    for cls in TRUTH_ORDER:
        lines.append(f"{CLASS_NAMES[cls]},{rates[cls] * 100.0:.1f}%")
    return "\n".join(lines) + "\n"
