"""Command line front end: run schedules, verify traces, decode injections.

Exit codes: 0 success, 1 failed run or failed verification, 2 usage errors
(bad flags, missing files, malformed inputs).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine as E
from . import forcing as F
from . import injections as I
from . import oracle as O
from . import trees as T
from . import words as W
from .errors import OrbitCodeError


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _fail_run(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def parse_bits(text: str) -> tuple[int, ...]:
    """A bit string, written in binary (10110) or hex (0x16)."""
    if text.lower().startswith("0x"):
        digits = text[2:]
        if not digits:
            raise ValueError("empty hex bit string")
        value = int(digits, 16)
        return tuple(int(b) for b in bin(value)[2:].zfill(4 * len(digits)))
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"bits must be binary or 0x-hex, got {text!r}")
    return tuple(int(ch) for ch in text)


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _load_oracle(spec: str):
    if spec == "trivial":
        return O.trivial_oracle()
    if spec == "translation":
        return O.translation_oracle()
    if spec.startswith("staged:"):
        data = _load_json(spec[len("staged:") :])
        if isinstance(data, dict):
            data = data["stages"]
        return O.staged_oracle([O.stage_from_data(entry) for entry in data])
    raise ValueError(f"unknown oracle {spec!r} (trivial, translation, staged:<path>)")


def _build_schedule(args, flavor, oracle) -> list:
    schedule: list = []
    if args.schedule is not None:
        if args.schedule.startswith("auto:"):
            schedule = E.auto_schedule(flavor, int(args.schedule[len("auto:") :]))
        else:
            data = _load_json(args.schedule)
            if isinstance(data, dict):
                data = data["schedule"]
            schedule = [E.requirement_from_data(entry, oracle) for entry in data]
    if args.words:
        for token in args.words.split(","):
            token = token.strip()
            if token:
                schedule.append(E.WordAdded(W.parse_word(token, oracle)))
    for _ in range(args.full_trees):
        schedule.append(E.TreeDiagonalized(T.FullInjectiveTree()))
    for i in range(args.sparse_trees):
        schedule.append(E.TreeDiagonalized(T.SparseCongruenceTree(args.seed + i)))
    return schedule


def _describe(req_data: dict) -> str:
    kind = req_data["kind"]
    if kind == "domain_hits":
        return f"domain_hits({req_data['n']})"
    if kind == "range_hits":
        return f"range_hits({req_data['m']})"
    if kind == "word_added":
        return f"word_added({req_data['word']})"
    if kind == "tree_diagonalized":
        return f"tree_diagonalized({req_data['tree']['kind']})"
    return f"orbit_coded({req_data['index']})"


def cmd_run(args) -> int:
    flavor = F.Flavor(args.flavor)
    if flavor is F.Flavor.PLAIN and args.bits is not None:
        return _fail_usage("plain runs take no --bits")
    if flavor is not F.Flavor.PLAIN and args.bits is None:
        return _fail_usage(f"{flavor.value} runs need --bits")
    try:
        bits = () if args.bits is None else parse_bits(args.bits)
    except ValueError as exc:
        return _fail_usage(str(exc))
    try:
        oracle = _load_oracle(args.oracle)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail_usage(f"cannot load oracle: {exc}")
    try:
        schedule = _build_schedule(args, flavor, oracle)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail_usage(f"cannot build schedule: {exc}")
    if not schedule:
        return _fail_usage("empty schedule: give --schedule, --words, or trees")
    try:
        trace = E.run(flavor, bits, schedule, oracle)
    except OrbitCodeError as exc:
        return _fail_run(str(exc))
    data = E.trace_to_data(trace, oracle)
    out = Path(args.out)
    out.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    for step in data["steps"]:
        print(f"step {step['index']}: {_describe(step['requirement'])} {step['op']} ok")
    for event in data["growth_events"]:
        print(
            f"growth at step {event['step']}: window {event['window']}"
            f" (needed {event['required']})"
        )
    if trace.decoded:
        print("decoded: " + "".join(str(b) for b in trace.decoded))
    print(f"trace written to {out}")
    return 0


def cmd_verify(args) -> int:
    try:
        data = _load_json(args.trace)
    except OSError as exc:
        return _fail_usage(f"cannot read trace: {exc}")
    except json.JSONDecodeError as exc:
        return _fail_usage(f"not JSON: {exc}")
    result = E.verify_trace_data(data)
    if not result:
        return _fail_run(f"verification failed: {result.reason}")
    print(f"ok: {len(data.get('steps', []))} steps verified")
    return 0


def cmd_decode(args) -> int:
    try:
        data = _load_json(args.source)
    except OSError as exc:
        return _fail_usage(f"cannot read input: {exc}")
    except json.JSONDecodeError as exc:
        return _fail_usage(f"not JSON: {exc}")
    if isinstance(data, dict) and "final" in data:
        pairs = data["final"]["injection"]
    elif isinstance(data, dict) and "injection" in data:
        pairs = data["injection"]
    else:
        return _fail_usage("input holds neither a trace nor a stage")
    try:
        s = I.injection_from_pairs(pairs)
        bits = E.decode(s, args.mode, args.upto)
    except ValueError as exc:
        return _fail_usage(str(exc))
    except OrbitCodeError as exc:
        return _fail_run(str(exc))
    print("".join(str(b) for b in bits))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitcode",
        description="build, verify, and decode orbit-coded partial injections",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="meet a schedule of requirements")
    runp.add_argument("--flavor", required=True, choices=["plain", "coding", "dagger"])
    runp.add_argument("--bits", help="target bits, binary (10110) or hex (0x16)")
    runp.add_argument(
        "--oracle",
        default="trivial",
        help="trivial, translation, or staged:<stages.json>",
    )
    runp.add_argument(
        "--schedule", help="auto:N for the stock schedule, or a JSON schedule file"
    )
    runp.add_argument("--words", help="comma-separated words to adjoin, e.g. x^2,x^3")
    runp.add_argument("--full-trees", type=int, default=0, dest="full_trees")
    runp.add_argument("--sparse-trees", type=int, default=0, dest="sparse_trees")
    runp.add_argument("--seed", type=int, default=0)
    runp.add_argument("--out", default="trace.json")
    runp.set_defaults(handler=cmd_run)

    verifyp = sub.add_parser("verify", help="replay and recheck a trace file")
    verifyp.add_argument("trace")
    verifyp.set_defaults(handler=cmd_verify)

    decodep = sub.add_parser("decode", help="read bits out of a trace or stage file")
    decodep.add_argument("source")
    decodep.add_argument(
        "--mode", required=True, choices=["orbit_order", "prime_parity"]
    )
    decodep.add_argument("--upto", type=int, default=None)
    decodep.set_defaults(handler=cmd_decode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
