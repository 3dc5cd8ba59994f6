"""Command-line entry point: replay traces, generate and evaluate
gesture corpora, and serve the live control endpoint.
"""
from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from .config import SystemConfig, load_config_file
from .corpus import CorpusSpec, generate_corpus, TruthWindow, TruthClass
from .evaluate import matrix_to_csv, rates_to_csv, run_eval, success_rates
from .sim import run_scenario
from .skeleton import parse_trace, serialize_trace

TRUTH_HEADER = "#reclass-truth v1"


def _load_config(path: str | None) -> SystemConfig:
    if path is None:
        return SystemConfig()
    return load_config_file(path)


def _load_corpus_spec(path: str | None) -> CorpusSpec:
    if path is None:
        return CorpusSpec()
    cp = configparser.ConfigParser()
    cp.read(path)
    sec = cp["corpus"] if cp.has_section("corpus") else cp["DEFAULT"]
    kwargs = {}
    for key in ("noise_sigma", "dropout_prob", "walk_speed", "settle"):
        if key in sec:
            kwargs[key] = float(sec[key])
    if "instances_per_gesture" in sec:
        kwargs["instances_per_gesture"] = int(sec["instances_per_gesture"])
    for key in ("hold_range", "delusive_hold_range", "walk_x_range", "walk_z_range"):
        if key in sec:
            lo, hi = (float(tok) for tok in sec[key].replace(",", " ").split())
            kwargs[key] = (lo, hi)
    return CorpusSpec(**kwargs)


def serialize_truth(windows: list[TruthWindow]) -> str:
    lines = [TRUTH_HEADER]
    for w in windows:
        lines.append(f"start={w.start!r} stop={w.stop!r} label={w.truth.value} pose={w.pose}")
    return "\n".join(lines) + "\n"


def parse_truth(text: str) -> list[TruthWindow]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TRUTH_HEADER:
        raise ValueError(f"missing header {TRUTH_HEADER!r}")
    windows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        kv = dict(tok.split("=", 1) for tok in line.split())
        windows.append(
            TruthWindow(
                start=float(kv["start"]),
                stop=float(kv["stop"]),
                truth=TruthClass(kv["label"]),
                pose=kv.get("pose", ""),
            )
        )
    return windows


def cmd_replay(args) -> int:
    config = _load_config(args.config)
    trace = parse_trace(Path(args.trace).read_bytes())
    sim, logs = run_scenario(config, trace)
    edl = sim.finalize()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "session.edl").write_bytes(edl)
    (out_dir / "wire.bin").write_bytes(bytes(logs.wire))
    print(f"frames: {sim.frame_count}")
    print(f"gesture events: {len(logs.gestures)}")
    for ev in logs.gestures:
        print(f"  {ev.fired_at:9.3f}s {ev.label.value} (held {ev.held_for:.2f}s)")
    print(f"segments: {len(sim.edl.segments)}")
    print(f"wire bytes: {len(logs.wire)}")
    print(f"wrote {out_dir / 'session.edl'} and {out_dir / 'wire.bin'}")
    if args.serve is not None:
        from .server import serve

        serve(args.serve, config)
    return 0


def cmd_gen_corpus(args) -> int:
    spec = _load_corpus_spec(args.corpus_spec)
    trace, truth = generate_corpus(spec, args.seed)
    Path(args.out_trace).write_bytes(serialize_trace(trace))
    Path(args.out_truth).write_text(serialize_truth(truth), encoding="ascii")
    print(f"wrote {len(trace.frames)} frames to {args.out_trace}")
    print(f"wrote {len(truth)} truth windows to {args.out_truth}")
    return 0


def cmd_eval(args) -> int:
    spec = _load_corpus_spec(args.corpus_spec)
    trace, truth = generate_corpus(spec, args.seed)
    result = run_eval(trace, truth)
    csv = matrix_to_csv(result.matrix)
    if args.out:
        Path(args.out).write_text(csv, encoding="ascii")
        print(f"wrote confusion matrix to {args.out}")
    sys.stdout.write(csv)
    sys.stdout.write(rates_to_csv(success_rates(result.matrix)))
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.port, _load_config(args.config))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="reclass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="run a recorded skeleton trace through the simulator")
    p.add_argument("trace")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--serve", type=int, default=None, metavar="PORT")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("gen-corpus", help="generate a synthetic gesture corpus")
    p.add_argument("--corpus-spec", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-trace", default="corpus.trace")
    p.add_argument("--out-truth", default="corpus.truth")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("eval", help="generate a corpus and score recognition")
    p.add_argument("--corpus-spec", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the live control websocket endpoint")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
