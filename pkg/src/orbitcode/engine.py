"""Schedule-driven construction runs.

A run starts from the empty condition and meets one requirement per step:
hit a domain or range point, adjoin a word, diagonalize against an injective
tree, or close the next coded orbit.  Every step is certified by an order
check against the previous condition, and the full trace (schedule, steps,
certificates, growth events, final condition, decoded bits) serializes to
JSON that an independent verifier can replay without trusting the run.

Windowed oracles may refuse evaluations mid-step; the engine then grows the
window once, generously, and retries that step a single time before aborting
with the step index.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from . import forcing as F
from . import injections as I
from . import oracle as O
from . import trees as T
from . import words as W
from .errors import (
    EngineError,
    InternalCheckFailed,
    OrbitCodeError,
    PrefixTooShort,
    WindowTooSmall,
)

CONVENTIONS = {
    "format_version": 1,
    "prime_indexing": "p0=2",
    "integer_pairing": "0,-1,1,-2,2,...",
    "orbit_order": "closed orbits sorted by minimum",
}


@dataclass(frozen=True)
class DomainHits:
    n: int


@dataclass(frozen=True)
class RangeHits:
    m: int


@dataclass(frozen=True)
class WordAdded:
    word: W.Word


@dataclass(frozen=True)
class TreeDiagonalized:
    tree: T.InjectiveTree
    node: T.Node = ()


@dataclass(frozen=True)
class OrbitCoded:
    index: int


Requirement = DomainHits | RangeHits | WordAdded | TreeDiagonalized | OrbitCoded


def requirement_to_data(req: Requirement, oracle) -> dict:
    if isinstance(req, DomainHits):
        return {"kind": "domain_hits", "n": req.n}
    if isinstance(req, RangeHits):
        return {"kind": "range_hits", "m": req.m}
    if isinstance(req, WordAdded):
        return {"kind": "word_added", "word": W.format_word(req.word, oracle)}
    if isinstance(req, TreeDiagonalized):
        return {
            "kind": "tree_diagonalized",
            "tree": req.tree.descriptor(),
            "node": list(req.node),
        }
    if isinstance(req, OrbitCoded):
        return {"kind": "orbit_coded", "index": req.index}
    raise TypeError(f"not a requirement: {req!r}")


def requirement_from_data(data: Mapping, oracle) -> Requirement:
    kind = data["kind"]
    if kind == "domain_hits":
        return DomainHits(int(data["n"]))
    if kind == "range_hits":
        return RangeHits(int(data["m"]))
    if kind == "word_added":
        return WordAdded(W.parse_word(data["word"], oracle))
    if kind == "tree_diagonalized":
        return TreeDiagonalized(
            T.tree_from_descriptor(data["tree"]), tuple(int(v) for v in data["node"])
        )
    if kind == "orbit_coded":
        return OrbitCoded(int(data["index"]))
    raise ValueError(f"unknown requirement kind {kind!r}")


@dataclass
class RunStep:
    index: int
    requirement: Requirement
    op: str
    certificate: F.ExtensionCertificate
    extra: dict = field(default_factory=dict)


@dataclass
class RunTrace:
    flavor: F.Flavor
    target: tuple[int, ...] | None
    schedule: tuple[Requirement, ...]
    steps: list[RunStep]
    final: F.Condition
    decoded: tuple[int, ...]
    oracle_spec: dict
    growth_events: list[dict]


def _apply_requirement(req: Requirement, c: F.Condition, oracle):
    """Meet one requirement; returns (op name, new condition, extra data)."""
    if isinstance(req, DomainHits):
        if c.s.apply(req.n) is not None:
            return "already_present", c, {"n": req.n}
        new = F.extend_domain(c, req.n, oracle)
        return "extend_domain", new, {"n": req.n, "value": new.s.apply(req.n)}
    if isinstance(req, RangeHits):
        if c.s.apply_inverse(req.m) is not None:
            return "already_present", c, {"m": req.m}
        new = F.extend_range(c, req.m, oracle)
        return "extend_range", new, {"m": req.m, "preimage": new.s.apply_inverse(req.m)}
    if isinstance(req, WordAdded):
        w = W.reduce(req.word.letters, oracle)
        extra = {"word": W.format_word(w, oracle)}
        if w in c.words:
            return "already_present", c, extra
        if c.flavor is F.Flavor.DAGGER:
            return "add_word", F.add_word(c, w, oracle), extra
        return "adjoin_word", replace(c, words=c.words | {w}), extra
    if isinstance(req, TreeDiagonalized):
        new, witness, k = F.tree_extend(c, req.tree, req.node, oracle)
        extra = {
            "node": list(req.node),
            "witness_node": list(witness),
            "witness_index": k,
            "witness_value": new.s.apply(k),
        }
        return "tree_extend", new, extra
    if isinstance(req, OrbitCoded):
        new = c
        closed_before = len(I.closed_orbits(new.s))
        while len(I.closed_orbits(new.s)) <= req.index:
            new = F.code_next_orbit(new, oracle)
        closed = I.closed_orbits(new.s)
        extra = {
            "index": req.index,
            "orbits_closed": len(closed) - closed_before,
            "sizes": [o.size for o in closed],
        }
        return "code_next_orbit", new, extra
    raise TypeError(f"not a requirement: {req!r}")


def _grow_once(oracle, needed: int, step: int, growth_events: list[dict]) -> None:
    current = oracle.window()
    if current >= O.UNBOUNDED:
        raise EngineError(step, "an unwindowed oracle reported a window miss")
    goal = max(needed, 2 * current) + 16
    reached = oracle.grow_window(goal)
    growth_events.append(
        {"step": step, "required": needed, "target": goal, "window": reached}
    )


def _attempt(step: int, operation, oracle, growth_events: list[dict]):
    """Run operation, allowing one window growth and a single retry."""
    try:
        return operation()
    except WindowTooSmall as miss:
        _grow_once(oracle, miss.required, step, growth_events)
        try:
            return operation()
        except WindowTooSmall as again:
            raise EngineError(
                step, f"window still too small after growth, need {again.required}"
            ) from again


def _decode_final(c: F.Condition) -> tuple[int, ...]:
    if c.flavor is F.Flavor.CODING:
        return I.o_partial(c.s)
    if c.flavor is F.Flavor.DAGGER:
        if not c.target:
            return ()
        return I.o_dagger(c.s, len(c.target) - 1)
    return ()


def run(flavor, r, schedule: Sequence[Requirement], oracle) -> RunTrace:
    """Meet the scheduled requirements in order, certifying every step."""
    flavor = F.Flavor(flavor) if not isinstance(flavor, F.Flavor) else flavor
    if flavor is F.Flavor.PLAIN:
        if r:
            raise ValueError("plain runs take no target bits")
        target = None
    else:
        target = tuple(int(b) for b in (r or ()))
    c = F.Condition(I.PartialInjection(), frozenset(), flavor, target)
    oracle_spec = oracle.descriptor()
    schedule = tuple(schedule)
    steps: list[RunStep] = []
    growth_events: list[dict] = []
    for index, req in enumerate(schedule):
        before = c
        op, after, extra = _attempt(
            index, lambda: _apply_requirement(req, before, oracle), oracle, growth_events
        )
        check = F.validate(after, oracle)
        if not check:
            raise EngineError(index, f"step produced an invalid condition: {check.reason}")
        cert = F.leq(after, before, oracle)
        if not cert:
            raise EngineError(index, f"step result does not extend: {cert.reason}")
        steps.append(RunStep(index, req, op, cert, extra))
        c = after
    return RunTrace(
        flavor=flavor,
        target=target,
        schedule=schedule,
        steps=steps,
        final=c,
        decoded=_decode_final(c),
        oracle_spec=oracle_spec,
        growth_events=growth_events,
    )


def seal(trace: RunTrace, oracle, generator_index: int = 0) -> O.CompletedStage:
    """Close every remaining open orbit of the run's final condition.

    The sealed injection has only cycles, so it induces a permutation of its
    support; the stage window is the first natural outside that settled
    initial segment.  Growth events recorded here carry the step index one
    past the schedule.
    """
    step = len(trace.schedule)
    sealed = _attempt(
        step,
        lambda: F.close_all_orbits(trace.final, oracle),
        oracle,
        trace.growth_events,
    )
    if I.open_orbits(sealed.s):
        raise InternalCheckFailed("sealing left an open orbit")
    cert = F.leq(sealed, trace.final, oracle)
    if not cert:
        raise EngineError(step, f"seal does not extend the run: {cert.reason}")
    check = F.validate(sealed, oracle)
    if not check:
        raise EngineError(step, f"seal produced an invalid condition: {check.reason}")
    stage = O.CompletedStage(
        generator_index=generator_index,
        condition=sealed,
        window=I.mex(sealed.s.support),
    )
    stage.trace = trace
    return stage


def default_stage_schedule(
    index: int, target: tuple[int, ...], oracle, depth: int = 4
) -> list[Requirement]:
    """The stock stage schedule: tie to the previous generator, code, cover.

    Stages after the first adjoin v = g·x and v² for the previous generator
    g, forcing the coded parity of v's evaluation before anything else; then
    the pure powers x^{p_n} pin every target bit, and domain/range hits make
    the injection total on an initial segment.
    """
    reqs: list[Requirement] = []
    if index > 0:
        g = oracle.generator(index - 1)
        v = W.Word((W.group(g), W.X))
        reqs.append(WordAdded(v))
        reqs.append(WordAdded(W.power(v, 2, oracle)))
    for n in range(len(target)):
        reqs.append(WordAdded(W.x_power(I.nth_prime(n))))
    for j in range(depth):
        reqs.append(DomainHits(j))
        reqs.append(RangeHits(j))
    return reqs


def staged_run(
    targets: Sequence[Sequence[int]],
    schedules: Sequence[Sequence[Requirement]] | None = None,
    depth: int = 4,
) -> list[O.CompletedStage]:
    """Build one sealed stage per target bit string, each over its predecessors.

    Stage i's oracle is the staged oracle over stages 0..i-1, so its words can
    mention every earlier generator; window growth triggered inside any stage
    re-extends the earlier ones in place.
    """
    stages: list[O.CompletedStage] = []
    for index, target in enumerate(targets):
        bits = tuple(int(b) for b in target)
        oracle = O.StagedOracle(stages)
        if schedules is None:
            schedule = default_stage_schedule(index, bits, oracle, depth)
        else:
            schedule = list(schedules[index])
        trace = run(F.Flavor.DAGGER, bits, schedule, oracle)
        stages.append(seal(trace, oracle, generator_index=index))
    return stages


def decode(s: I.PartialInjection, mode: str, upto: int | None = None) -> tuple[int, ...]:
    """Read bits back out of a finished injection.

    orbit_order: parities of closed-orbit sizes in min-order, truncated to
    upto+1 bits when a bound is given.  prime_parity: bit n is the parity of
    the number of closed orbits of size p_n.
    """
    if mode == "orbit_order":
        bits = I.o_partial(s)
        if upto is None:
            return bits
        if len(bits) <= upto:
            raise PrefixTooShort(f"only {len(bits)} closed orbits, need {upto + 1}")
        return bits[: upto + 1]
    if mode == "prime_parity":
        if upto is None:
            raise ValueError("prime_parity decoding needs an explicit bit bound")
        return I.o_dagger(s, upto)
    raise ValueError(f"unknown decode mode {mode!r}")


def verify_tightness_sample(
    stage: O.CompletedStage, trees: Sequence[T.ExplicitTree]
) -> list[dict]:
    """Check the stage permutation diagonalizes against each explicit tree.

    For each tree: search a witness above the root, then check every
    non-maximal node has one.  Raises WindowTooSmall if a tree probes indices
    the stage window does not settle.
    """
    g = stage.condition.s.as_dict()
    reports = []
    for tree in trees:
        deepest = max((len(node) for node in tree.nodes), default=0)
        if deepest > stage.window:
            raise WindowTooSmall(
                deepest, f"tree reaches depth {deepest}, window is {stage.window}"
            )
        witness = T.diagonalization_witness(g, tree, ())
        dense = T.densely_diagonalizes(g, tree)
        counterexample = None
        if not dense:
            for node in sorted(tree.sorted_nodes(), key=lambda t: (len(t), t)):
                if not tree.is_maximal(node) and (
                    T.diagonalization_witness(g, tree, node) is None
                ):
                    counterexample = list(node)
                    break
        reports.append(
            {
                "tree": tree.descriptor(),
                "root_witness": None
                if witness is None
                else {"node": list(witness[0]), "index": witness[1]},
                "densely_diagonalizes": dense,
                "counterexample": counterexample,
            }
        )
    return reports


def auto_schedule(flavor, n: int) -> list[Requirement]:
    """The stock single-oracle schedule for n bits (or n cover points).

    Coding: hit i, cover i, close orbit i, for each i < n.  Dagger: the same
    cover interleaved with the pure powers x^j up to the n-th prime
    obligation.  Plain: cover only.
    """
    flavor = F.Flavor(flavor) if not isinstance(flavor, F.Flavor) else flavor
    reqs: list[Requirement] = []
    if flavor is F.Flavor.CODING:
        for i in range(n):
            reqs += [DomainHits(i), RangeHits(i), OrbitCoded(i)]
        return reqs
    if flavor is F.Flavor.DAGGER:
        exponents = list(range(1, I.nth_prime(n - 1) + 1)) if n > 0 else []
        for i in range(max(n, len(exponents))):
            if i < n:
                reqs += [DomainHits(i), RangeHits(i)]
            if i < len(exponents):
                reqs.append(WordAdded(W.x_power(exponents[i])))
        return reqs
    for i in range(n):
        reqs += [DomainHits(i), RangeHits(i)]
    return reqs


def trace_to_data(trace: RunTrace, oracle) -> dict:
    return {
        "conventions": dict(CONVENTIONS),
        "flavor": trace.flavor.value,
        "target": None if trace.target is None else list(trace.target),
        "oracle": trace.oracle_spec,
        "schedule": [requirement_to_data(req, oracle) for req in trace.schedule],
        "steps": [
            {
                "index": step.index,
                "requirement": requirement_to_data(step.requirement, oracle),
                "op": step.op,
                "certificate": F.certificate_to_data(step.certificate, oracle),
                "extra": step.extra,
            }
            for step in trace.steps
        ],
        "final": F.condition_to_data(trace.final, oracle),
        "decoded": list(trace.decoded),
        "growth_events": [dict(ev) for ev in trace.growth_events],
    }


def _requirement_holds(req: Requirement, extra: Mapping, c: F.Condition, oracle) -> bool:
    if isinstance(req, DomainHits):
        return c.s.apply(req.n) is not None
    if isinstance(req, RangeHits):
        return c.s.apply_inverse(req.m) is not None
    if isinstance(req, WordAdded):
        return W.reduce(req.word.letters, oracle) in c.words
    if isinstance(req, OrbitCoded):
        return len(I.closed_orbits(c.s)) > req.index
    if isinstance(req, TreeDiagonalized):
        try:
            witness = tuple(int(v) for v in extra["witness_node"])
            k = int(extra["witness_index"])
        except (KeyError, TypeError, ValueError):
            return False
        if not req.tree.contains(witness):
            return False
        if witness[: len(req.node)] != tuple(req.node):
            return False
        if not (len(req.node) <= k < len(witness)):
            return False
        return c.s.apply(k) == witness[k]
    return False


def _empty_condition_data(flavor: F.Flavor, target, oracle) -> dict:
    empty = F.Condition(I.PartialInjection(), frozenset(), flavor, target)
    return F.condition_to_data(empty, oracle)


def verify_trace_data(data: Mapping) -> F.CheckResult:
    """Replay a serialized trace from scratch and recheck every claim in it.

    Rebuilds the oracle from its recorded descriptor, applies the recorded
    window growths, then walks the steps: each certificate must recheck, each
    step's lower condition must equal the previous upper, each requirement
    must hold in its step's upper condition, and the final condition and
    decoded bits must match a recomputation.
    """
    try:
        oracle = O.oracle_from_descriptor(data["oracle"])
        flavor = F.Flavor(data["flavor"])
        raw_target = data.get("target")
        target = None if raw_target is None else tuple(int(b) for b in raw_target)
        for event in data.get("growth_events", ()):
            oracle.grow_window(int(event["target"]))
        schedule = data["schedule"]
        steps = data["steps"]
    except (KeyError, TypeError, ValueError, OrbitCodeError) as exc:
        return F.CheckResult(False, f"malformed trace: {exc}")
    if len(schedule) != len(steps):
        return F.CheckResult(False, "schedule and steps disagree in length")
    previous_upper = _empty_condition_data(flavor, target, oracle)
    for i, step in enumerate(steps):
        try:
            cert = step["certificate"]
            if step["requirement"] != schedule[i]:
                return F.CheckResult(False, f"step {i}: requirement drifted from schedule")
            if cert["lower"] != previous_upper:
                return F.CheckResult(
                    False, f"step {i}: does not start at the previous condition"
                )
            check = F.verify_certificate_data(cert, oracle)
            if not check:
                return F.CheckResult(False, f"step {i}: {check.reason}")
            upper = F.condition_from_data(cert["upper"], oracle)
            if upper.flavor is not flavor or upper.target != target:
                return F.CheckResult(False, f"step {i}: flavor or target drifted")
            valid = F.validate(upper, oracle)
            if not valid:
                return F.CheckResult(False, f"step {i}: invalid condition: {valid.reason}")
            req = requirement_from_data(step["requirement"], oracle)
            if not _requirement_holds(req, step.get("extra", {}), upper, oracle):
                return F.CheckResult(False, f"step {i}: requirement not satisfied")
            previous_upper = cert["upper"]
        except (KeyError, TypeError, ValueError, OrbitCodeError) as exc:
            return F.CheckResult(False, f"step {i}: malformed: {exc}")
    try:
        if data["final"] != previous_upper:
            return F.CheckResult(False, "final condition does not match the last step")
        final = F.condition_from_data(data["final"], oracle)
        if list(_decode_final(final)) != [int(b) for b in data["decoded"]]:
            return F.CheckResult(False, "decoded bits do not match the final condition")
    except (KeyError, TypeError, ValueError, OrbitCodeError) as exc:
        return F.CheckResult(False, f"malformed trace: {exc}")
    return F.CheckResult(True)
