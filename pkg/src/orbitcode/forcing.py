"""Conditions (s, E) and the constructive extension operations between them.

A condition pairs a finite partial injection s with a finite set E of
admissible words.  Extension (t, F) ≤ (s, E) means t ⊇ s, F ⊇ E, and no word
of E changes its fixed-point set when evaluated at t instead of s.  Three
flavors refine the base poset:

  Plain   — just the pair.
  Coding  — s is nice and the orbit-order code of s is a prefix of a target
            bit string r.
  Dagger  — E is closed under cyclic rotations, inverses and downward powers,
            and for every w = v^k in E the evaluation v[s] codes r in
            prime-parity up to every n with p_n ≤ k.

Every operation here returns a condition extending its input and re-checks
that claim directly, producing a certificate that can be re-verified later
from serialized data alone.  All tie-breaking picks the least value, so runs
are reproducible bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from . import injections as I
from . import trees as T
from . import words as W
from .errors import (
    InternalCheckFailed,
    KTooSmall,
    NotNiceInjection,
    PreconditionViolated,
    PrefixTooShort,
)

_SCAN_CAP = 1_000_000


class Flavor(Enum):
    PLAIN = "plain"
    CODING = "coding"
    DAGGER = "dagger"


@dataclass(frozen=True)
class Condition:
    s: I.PartialInjection
    words: frozenset[W.Word]
    flavor: Flavor = Flavor.PLAIN
    target: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.flavor is Flavor.PLAIN:
            if self.target is not None:
                raise ValueError("plain conditions carry no target bits")
        elif self.target is None:
            raise ValueError(f"{self.flavor.value} conditions need target bits")

    @property
    def max_word_length(self) -> int:
        """L: the longest expanded word in E, 0 when E is empty."""
        return max((len(w) for w in self.words), default=0)

    def sorted_words(self, oracle) -> list[W.Word]:
        return sorted(self.words, key=lambda w: W.sort_key(w, oracle))


def plain_condition(s=None, words: Iterable[W.Word] = ()) -> Condition:
    return Condition(s or I.PartialInjection(), frozenset(words), Flavor.PLAIN)


def coding_condition(r: Sequence[int], s=None, words: Iterable[W.Word] = ()) -> Condition:
    return Condition(s or I.PartialInjection(), frozenset(words), Flavor.CODING, tuple(r))


def dagger_condition(r: Sequence[int], s=None, words: Iterable[W.Word] = ()) -> Condition:
    return Condition(s or I.PartialInjection(), frozenset(words), Flavor.DAGGER, tuple(r))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Refusal:
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ExtensionCertificate:
    """A verified instance of upper ≤ lower with fixed-point snapshots."""

    lower: Condition
    upper: Condition
    snapshots: tuple[tuple[W.Word, frozenset[int]], ...]

    def __bool__(self) -> bool:
        return True


def support_bound(s: I.PartialInjection) -> int:
    return max(s.support, default=-1) + 1


def validate(c: Condition, oracle) -> CheckResult:
    """Check every flavor invariant; the reason names the first violated clause."""
    for w in c.sorted_words(oracle):
        if not W.is_nice(w):
            return CheckResult(False, f"word {W.format_word(w, oracle)!r} is not admissible")
    if c.flavor is Flavor.PLAIN:
        return CheckResult(True)
    if c.flavor is Flavor.CODING:
        if not I.is_nice_injection(c.s):
            return CheckResult(False, "injection is not nice")
        bits = I.o_partial(c.s)
        if len(bits) > len(c.target) or tuple(c.target[: len(bits)]) != bits:
            return CheckResult(
                False, f"orbit code {list(bits)} is not a prefix of target {list(c.target)}"
            )
        return CheckResult(True)
    # dagger
    for w in c.sorted_words(oracle):
        conjugates = W.cyclic_conjugates_and_inverses(w, oracle)
        if not conjugates <= c.words:
            missing = sorted(W.format_word(u, oracle) for u in conjugates - c.words)
            return CheckResult(
                False,
                f"word set not closed under rotation/inverse: missing {missing}",
            )
        v, k = W.indecomposable_root(w, oracle)
        for power in range(1, k):
            if W.power(v, power, oracle) not in c.words:
                return CheckResult(
                    False,
                    f"missing power {power} of root of {W.format_word(w, oracle)!r}",
                )
        graph = None
        n = 0
        while I.nth_prime(n) <= k:
            if graph is None:
                graph = I.word_graph(v, c.s, oracle)
            if len(c.target) <= n:
                return CheckResult(
                    False, f"target too short for power-{k} obligation at bit {n}"
                )
            if not I.codes_up_to(graph, c.target, n):
                return CheckResult(
                    False,
                    f"evaluation of {W.format_word(v, oracle)!r} miscodes bit {n}",
                )
            n += 1
    return CheckResult(True)


def leq(upper: Condition, lower: Condition, oracle) -> ExtensionCertificate | Refusal:
    """Certificate that upper extends lower: graphs and words grow, fixed points don't."""
    if upper.flavor is not lower.flavor or upper.target != lower.target:
        return Refusal("flavor or target mismatch")
    if not upper.s.extends(lower.s):
        return Refusal("injection does not extend")
    if not lower.words <= upper.words:
        return Refusal("word set does not extend")
    bound = support_bound(upper.s)
    snapshots = []
    for w in lower.sorted_words(oracle):
        fix_lower = I.fixed_points(w, lower.s, oracle, bound)
        fix_upper = I.fixed_points(w, upper.s, oracle, bound)
        if fix_lower != fix_upper:
            gained = sorted(fix_upper - fix_lower)
            lost = sorted(fix_lower - fix_upper)
            return Refusal(
                f"word {W.format_word(w, oracle)!r} changed fixed points"
                f" (gained {gained}, lost {lost})"
            )
        snapshots.append((w, fix_upper))
    return ExtensionCertificate(lower, upper, tuple(snapshots))


def _admissible(c: Condition, candidate: Condition, oracle):
    """validate + leq in one step; returns the certificate or a falsy refusal."""
    check = validate(candidate, oracle)
    if not check:
        return Refusal(check.reason)
    return leq(candidate, c, oracle)


def extend_domain(c: Condition, n: int, oracle) -> Condition:
    """Add n to the domain with the least value keeping the condition's order."""
    if c.s.apply(n) is not None:
        raise PreconditionViolated(f"{n} already in domain")
    taken = c.s.range
    for m in itertools.count():
        if m in taken:
            continue
        candidate = replace(c, s=c.s.with_pair(n, m))
        if _admissible(c, candidate, oracle):
            return candidate
        if m > _SCAN_CAP:
            raise InternalCheckFailed(f"no valid image for {n} below {_SCAN_CAP}")


def extend_range(c: Condition, m: int, oracle) -> Condition:
    """Add m to the range with the least preimage keeping the condition's order."""
    if c.s.apply_inverse(m) is not None:
        raise PreconditionViolated(f"{m} already in range")
    taken = c.s.domain
    for n in itertools.count():
        if n in taken:
            continue
        candidate = replace(c, s=c.s.with_pair(n, m))
        if _admissible(c, candidate, oracle):
            return candidate
        if n > _SCAN_CAP:
            raise InternalCheckFailed(f"no valid preimage for {m} below {_SCAN_CAP}")


def _nonidentity_handles(words: Iterable[W.Word], oracle) -> list:
    return [h for h in W.graph_restriction(words, oracle) if not oracle.is_identity(h)]


def avoidance_bound(
    c: Condition, oracle, extra_words: Iterable[W.Word] = (), pairwise: bool = False
) -> int:
    """N with supports, their group images, and group fixed points all below it.

    With pairwise=True the bound also clears every point where two distinct
    group elements of the restriction agree, which the chain constructions
    need; fixed-point data certified only within a window bounds what the
    oracle has seen, and any later evaluation beyond the window fails loudly
    rather than guessing.
    """
    bound = support_bound(c.s)
    handles = _nonidentity_handles(list(c.words) + list(extra_words), oracle)
    for h in handles:
        for p in c.s.support:
            bound = max(bound, oracle.eval(h, p) + 1)
        report = oracle.fixed_points(h)
        if not report.all_naturals and report.points:
            bound = max(bound, max(report.points) + 1)
    if pairwise:
        for g0, g1 in itertools.combinations(handles, 2):
            diff = oracle.compose(oracle.invert(g0), g1)
            if oracle.is_identity(diff):
                continue
            report = oracle.fixed_points(diff)
            if not report.all_naturals and report.points:
                bound = max(bound, max(report.points) + 1)
    return bound


def many_extensions(
    c: Condition, tree: T.InjectiveTree, node: T.Node, count: int, oracle
) -> tuple[T.Node, tuple[tuple[int, int], ...]]:
    """Walk the tree collecting more than `count` one-point extensions of c.

    Every option (k, v) has k fresh for the node and the domain, v outside
    the range, and v ≠ g(k) for each g in the word set's group restriction;
    each such pair extends c on its own.  Words must all have a single x
    occurrence: those are the only shapes whose fixed points a single fresh
    pair provably cannot touch.
    """
    for w in c.words:
        if w.x_count() != 1:
            raise PreconditionViolated(
                f"word {W.format_word(w, oracle)!r} has more than one x"
            )
    handles = W.graph_restriction(c.words, oracle)
    dom, ran = c.s.domain, c.s.range
    current = tuple(node)
    options: list[tuple[int, int]] = []
    stall_budget = count + len(dom) + 64
    while len(options) <= count:
        j = len(current)
        forbidden = {(j, v) for v in ran}
        forbidden.update((j, oracle.eval(h, j)) for h in handles)
        grown = tree.extend_avoiding(current, forbidden)
        for k in range(len(current), len(grown)):
            v = grown[k]
            if k in dom or v in ran:
                continue
            if any(oracle.eval(h, k) == v for h in handles):
                continue
            candidate = replace(c, s=c.s.with_pair(k, v))
            if not leq(candidate, c, oracle):
                raise InternalCheckFailed(
                    f"avoidance clauses missed a fixed point at ({k}, {v})"
                )
            options.append((k, v))
        current = grown
        stall_budget -= 1
        if stall_budget < 0 and len(options) <= count:
            raise InternalCheckFailed("tree extensions stopped yielding fresh indices")
    return current, tuple(options)


def _single_occurrence_subwords(w: W.Word) -> set[W.Word]:
    """Contiguous admissible subwords with one x: {x} plus g·x per positive block."""
    out = {W.Word((W.X,))}
    for handle, exp in W.nice_blocks(w) or ():
        if handle is not None and exp > 0:
            out.add(W.Word((W.group(handle), W.X)))
    return out


def tree_extend(
    c: Condition, tree: T.InjectiveTree, node: T.Node, oracle
) -> tuple[Condition, T.Node, int]:
    """One new pair (k, t'(k)) read off a positive tree, below c.

    Splits E into single-x words (plus the single-x subwords of the rest) for
    the option search, then takes any option whose value clears the avoidance
    bound N; more than N options with pairwise distinct values guarantee one.
    """
    single = set()
    for w in c.words:
        if w.x_count() == 1:
            single.add(w)
        else:
            single |= _single_occurrence_subwords(w)
    scratch = plain_condition(c.s, single)
    bound = avoidance_bound(c, oracle)
    grown, options = many_extensions(scratch, tree, node, bound, oracle)
    viable = [(k, v) for k, v in options if v >= bound]
    if not viable:
        raise InternalCheckFailed(
            f"{len(options)} options but none reaches bound {bound}"
        )
    k0, v0 = min(viable)
    candidate = replace(c, s=c.s.with_pair(k0, v0))
    admitted = _admissible(c, candidate, oracle)
    if not admitted:
        raise InternalCheckFailed(f"fresh pair ({k0}, {v0}) refused: {admitted.reason}")
    return candidate, grown, k0


def closing_threshold(c: Condition, n: int) -> int:
    """K: any orbit size above it is reachable when closing through n."""
    return I.orbit_of(c.s, n).size + c.max_word_length


def _fresh_chain_ok(
    a: int, chosen: set[int], support: frozenset[int], handles, oracle
) -> bool:
    if a in support or a in chosen:
        return False
    for h in handles:
        image = oracle.eval(h, a)
        if image == a or image in chosen or image in support:
            return False
    return True


def close_orbit(c: Condition, n: int, k: int, oracle) -> Condition:
    """Close the orbit through n into a cycle of size exactly k.

    Works for any k above the threshold K = |orbit(n)| + L: the orbit is
    first anchored in the domain if n is isolated, then a fresh chain of
    k − |orbit| points is routed from the orbit's exit back to its entry.
    Chain points and their group images avoid everything already present, so
    no word of E gains a fixed point.
    """
    orbit = I.orbit_of(c.s, n)
    if orbit.closed:
        raise PreconditionViolated(f"{n} lies in a closed orbit")
    threshold = closing_threshold(c, n)
    if k <= threshold:
        raise KTooSmall(f"need k > {threshold}, got {k}")

    base = c
    if n not in c.s.support:
        # anchor the isolated point with a fresh image so the size arithmetic
        # stays exact: the orbit becomes {n, m} and only then grows a chain
        anchored = None
        for m in itertools.count():
            if m in c.s.support or m == n:
                continue
            candidate = replace(c, s=c.s.with_pair(n, m))
            if _admissible(c, candidate, oracle):
                anchored = candidate
                break
            if m > _SCAN_CAP:
                break
        if anchored is None:
            raise InternalCheckFailed(f"no fresh anchor image for {n}")
        base = anchored

    orbit = I.orbit_of(base.s, n)
    chain_length = k - orbit.size
    if chain_length < 0:
        raise InternalCheckFailed("orbit outgrew the requested size")
    handles = _nonidentity_handles(base.words, oracle)
    support = base.s.support
    chain: list[int] = []
    a = 0
    while len(chain) < chain_length:
        if _fresh_chain_ok(a, set(chain), support, handles, oracle):
            chain.append(a)
        a += 1
        if a > _SCAN_CAP:
            raise InternalCheckFailed("chain scan exhausted")
    route = [orbit.exit, *chain, orbit.entry]
    closed = replace(
        base, s=base.s.with_pairs((route[i], route[i + 1]) for i in range(len(route) - 1))
    )

    final_orbit = I.orbit_of(closed.s, n)
    if not final_orbit.closed or final_orbit.size != k:
        raise InternalCheckFailed(
            f"closed orbit came out {final_orbit.size}, wanted {k}"
        )
    admitted = _admissible(c, closed, oracle)
    if not admitted:
        raise PreconditionViolated(
            f"closing through {n} at size {k} breaks the flavor: {admitted.reason}"
        )
    return closed


def code_next_orbit(c: Condition, oracle) -> Condition:
    """Close the orbit at the least uncovered natural, parity-matched to the target."""
    if c.flavor is not Flavor.CODING:
        raise PreconditionViolated("coding flavor required")
    covered: set[int] = set()
    for o in I.closed_orbits(c.s):
        covered |= o.elements
    index = len(I.closed_orbits(c.s))
    if index >= len(c.target):
        raise PrefixTooShort(f"target has only {len(c.target)} bits")
    n = I.mex(covered)
    threshold = closing_threshold(c, n)
    k = threshold + 1
    if k % 2 != c.target[index] % 2:
        k += 1
    return close_orbit(c, n, k, oracle)


def _base_point_ok(
    b: int,
    bound: int,
    chosen: set[int],
    support: frozenset[int],
    handles,
    oracle,
    back: frozenset[int] = frozenset(),
) -> bool:
    """Clauses for a fresh cycle point: above the bound, no collisions.

    `back` exempts the intended group edge: a point forced as g(a) is mapped
    back onto a by g^-1, and above the pairwise bound no other handle can
    reach a, so allowing exactly that image loses nothing.
    """
    if b <= bound or b in support or b in chosen:
        return False
    for h in handles:
        image = oracle.eval(h, b)
        if image == b:
            return False
        if (image in chosen or image in support) and image not in back:
            return False
    return True


def strong_close_orbit(c: Condition, v: W.Word, k: int, oracle) -> Condition:
    """Give the evaluation v[s] exactly one new closed orbit, of size k.

    Walks the letters of v^k around a cycle of fresh points: group letters
    force the next point through the oracle, x letters commit new injection
    pairs on points chosen above the avoidance bound.  Admissible words
    alternate group and x letters, so one step of lookahead through a forced
    group image keeps the greedy least-point choice safe.
    """
    if c.flavor is not Flavor.DAGGER:
        raise PreconditionViolated("dagger flavor required")
    root, multiplicity = W.indecomposable_root(v, oracle)
    if (root, multiplicity) != (v, 1):
        raise PreconditionViolated(f"{W.format_word(v, oracle)!r} is a proper power")
    if k < 1:
        raise PreconditionViolated("need k >= 1")
    if W.power(v, k, oracle) in c.words:
        raise PreconditionViolated("that power is already tracked in E")

    before = I.closed_orbits(I.word_graph(v, c.s, oracle))
    handles = _nonidentity_handles(list(c.words) + [v], oracle)
    bound = avoidance_bound(c, oracle, extra_words=[v], pairwise=True)
    support = c.s.support
    letters = v.letters * k
    m = len(letters)

    def letter_at(i: int) -> W.Letter:
        # the walk applies the word's letters rightmost-first around the cycle
        return letters[m - 1 - i]

    def pick_fresh(chosen: set[int], next_letter: W.Letter | None) -> int:
        b = bound + 1
        while True:
            if _base_point_ok(b, bound, chosen, support, handles, oracle):
                if next_letter is None or next_letter.kind is not W.LetterKind.GROUP:
                    return b
                forced = oracle.eval(next_letter.handle, b)
                if _base_point_ok(
                    forced, bound, chosen | {b}, support, handles, oracle,
                    back=frozenset((b,)),
                ):
                    return b
            b += 1
            if b > _SCAN_CAP:
                raise InternalCheckFailed("fresh-point scan exhausted")

    if m == 1:
        a = pick_fresh(set(), None)
        closed = replace(c, s=c.s.with_pair(a, a))
    else:
        points: list[int | None] = [None] * m
        chosen: set[int] = set()
        pairs: list[tuple[int, int]] = []

        def assign(i: int, value: int):
            points[i] = value
            chosen.add(value)

        assign(1, pick_fresh(chosen, letter_at(1)))
        for i in range(1, m):
            target = (i + 1) % m
            letter = letter_at(i)
            if letter.kind is W.LetterKind.GROUP:
                forced = oracle.eval(letter.handle, points[i])
                if not _base_point_ok(
                    forced, bound, chosen, support, handles, oracle,
                    back=frozenset((points[i],)),
                ):
                    raise InternalCheckFailed(f"forced point {forced} violates clauses")
                assign(target, forced)
                continue
            if points[target] is None:
                assign(target, pick_fresh(chosen, letter_at(target) if target else None))
            if letter.kind is W.LetterKind.X:
                pairs.append((points[i], points[target]))
            else:
                pairs.append((points[target], points[i]))
        # the rightmost letter of an admissible word is always x
        pairs.append((points[0], points[1]))
        closed = replace(c, s=c.s.with_pairs(pairs))

    after = I.closed_orbits(I.word_graph(v, closed.s, oracle))
    old_sets = {o.elements for o in before}
    new_orbits = [o for o in after if o.elements not in old_sets]
    if len(after) != len(before) + 1 or len(new_orbits) != 1 or new_orbits[0].size != k:
        raise InternalCheckFailed(
            f"expected one new size-{k} orbit of the evaluation,"
            f" got {sorted(o.size for o in after)} from {sorted(o.size for o in before)}"
        )
    admitted = _admissible(c, closed, oracle)
    if not admitted:
        raise InternalCheckFailed(f"strong closure refused: {admitted.reason}")
    return closed


def add_word(c: Condition, w: W.Word, oracle) -> Condition:
    """Extend a dagger condition so that w (and its closure) lies in E.

    Follows the density proof: powers of the indecomposable root are added
    in increasing order, and whenever the next exponent is a prime p_n whose
    orbit-count parity disagrees with the target bit, one strong closure
    flips it before the word enters E.
    """
    if c.flavor is not Flavor.DAGGER:
        raise PreconditionViolated("dagger flavor required")
    if w in c.words:
        return c
    v, k = W.indecomposable_root(w, oracle)
    current = c if k == 1 else add_word(c, W.power(v, k - 1, oracle), oracle)
    n = I.prime_index(k)
    if n is not None:
        if len(current.target) <= n:
            raise PrefixTooShort(
                f"target has {len(current.target)} bits, power {k} obligates bit {n}"
            )
        graph = I.word_graph(v, current.s, oracle)
        if I.o_dagger(graph, n)[n] != current.target[n]:
            current = strong_close_orbit(current, v, k, oracle)
            graph = I.word_graph(v, current.s, oracle)
            if I.o_dagger(graph, n)[n] != current.target[n]:
                raise InternalCheckFailed(f"strong closure failed to flip bit {n}")
    closure = set(current.words)
    for power in range(1, k + 1):
        closure |= W.cyclic_conjugates_and_inverses(W.power(v, power, oracle), oracle)
    result = replace(current, words=frozenset(closure))
    admitted = _admissible(c, result, oracle)
    if not admitted:
        raise InternalCheckFailed(f"word addition refused: {admitted.reason}")
    return result


def obligated_primes(c: Condition, oracle) -> set[int]:
    """Primes p_n for which some tracked power v^{p_n} constrains bit n."""
    out: set[int] = set()
    for w in c.words:
        _, k = W.indecomposable_root(w, oracle)
        n = 0
        while I.nth_prime(n) <= k:
            out.add(I.nth_prime(n))
            n += 1
    return out


def close_all_orbits(c: Condition, oracle) -> Condition:
    """Close every open orbit, respecting the flavor's coding discipline.

    Coding conditions consume target bits through code_next_orbit until no
    open orbit is left (fresh filler orbits keep minima initial); the other
    flavors close open orbits in min-order at the least admissible size,
    skipping sizes that would flip an obligated prime parity.
    """
    if c.flavor is Flavor.CODING:
        while I.open_orbits(c.s):
            c = code_next_orbit(c, oracle)
        return c
    avoid = obligated_primes(c, oracle) if c.flavor is Flavor.DAGGER else set()
    while True:
        open_now = I.open_orbits(c.s)
        if not open_now:
            return c
        n = open_now[0].minimum
        k = closing_threshold(c, n) + 1
        while k in avoid:
            k += 1
        c = close_orbit(c, n, k, oracle)


def condition_to_data(c: Condition, oracle) -> dict:
    data: dict = {
        "flavor": c.flavor.value,
        "injection": [list(p) for p in c.s.pairs()],
        "words": [W.format_word(w, oracle) for w in c.sorted_words(oracle)],
    }
    if c.target is not None:
        data["r_prefix"] = list(c.target)
    return data


def condition_from_data(data: dict, oracle) -> Condition:
    target = data.get("r_prefix")
    return Condition(
        I.injection_from_pairs(data["injection"]),
        frozenset(W.parse_word(text, oracle) for text in data["words"]),
        Flavor(data["flavor"]),
        None if target is None else tuple(int(b) for b in target),
    )


def certificate_to_data(cert: ExtensionCertificate, oracle) -> dict:
    return {
        "lower": condition_to_data(cert.lower, oracle),
        "upper": condition_to_data(cert.upper, oracle),
        "fixpoint_snapshots": [
            {"word": W.format_word(w, oracle), "fixed_points": sorted(points)}
            for w, points in sorted(
                cert.snapshots, key=lambda item: W.sort_key(item[0], oracle)
            )
        ],
    }


def verify_certificate_data(data: dict, oracle) -> CheckResult:
    """Recheck a serialized certificate from scratch: order and snapshots."""
    lower = condition_from_data(data["lower"], oracle)
    upper = condition_from_data(data["upper"], oracle)
    result = leq(upper, lower, oracle)
    if not result:
        return CheckResult(False, f"order recheck failed: {result.reason}")
    recomputed = {
        W.format_word(w, oracle): sorted(points) for w, points in result.snapshots
    }
    stored = {
        item["word"]: sorted(item["fixed_points"])
        for item in data["fixpoint_snapshots"]
    }
    if recomputed != stored:
        return CheckResult(False, "fixed-point snapshots do not match")
    return CheckResult(True)
