"""Ambient-group oracles: the group the word letters live in.

Every oracle answers composition, inversion, identity tests, pointwise
evaluation on naturals, and fixed-point queries with an explicit
certification (exact, or exact only within a finite window).  Three
implementations: the one-element group, the integers translating ℤ carried
onto ω by the zig-zag pairing 0, -1, 1, -2, 2, …, and the staged oracle whose
elements are reduced words in previously constructed generator injections.

The staged oracle is windowed: its generators are finite injections, so
evaluation beyond the settled region raises WindowTooSmall with the needed
bound, and grow_window extends every stage's injection (re-running domain and
range extensions plus orbit closing against the stage's own stored condition)
without ever changing settled values.  Old graph preservation is asserted on
every growth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import forcing as F
from . import injections as I
from . import words as W
from .errors import StageExtensionFailed, UnknownGroupElement, WindowTooSmall

UNBOUNDED = 2**62


@dataclass(frozen=True)
class FixedPointReport:
    points: frozenset[int]
    exact: bool
    all_naturals: bool = False
    window: int | None = None


class GroupOracle:
    """Interface; concrete oracles fill in the group operations."""

    def compose(self, a, b):
        raise NotImplementedError

    def invert(self, a):
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def is_identity(self, a) -> bool:
        raise NotImplementedError

    def eval(self, a, n: int) -> int:
        raise NotImplementedError

    def eval_inverse(self, a, n: int) -> int:
        return self.eval(self.invert(a), n)

    def fixed_points(self, a) -> FixedPointReport:
        raise NotImplementedError

    def window(self) -> int:
        return UNBOUNDED

    def grow_window(self, n: int) -> int:
        return self.window()

    def format_element(self, a) -> str:
        raise NotImplementedError

    def parse_element(self, text: str):
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


class TrivialOracle(GroupOracle):
    """The one-element group; its only element is the identity on ω."""

    def compose(self, a, b):
        self._check(a)
        self._check(b)
        return 0

    def invert(self, a):
        self._check(a)
        return 0

    def identity(self):
        return 0

    def is_identity(self, a) -> bool:
        self._check(a)
        return True

    def eval(self, a, n: int) -> int:
        self._check(a)
        return n

    def fixed_points(self, a) -> FixedPointReport:
        self._check(a)
        return FixedPointReport(frozenset(), exact=True, all_naturals=True)

    def format_element(self, a) -> str:
        self._check(a)
        return "e"

    def parse_element(self, text: str):
        if text != "e":
            raise UnknownGroupElement(f"trivial group has no element {text!r}")
        return 0

    def descriptor(self) -> dict:
        return {"kind": "trivial"}

    @staticmethod
    def _check(a):
        if a != 0:
            raise UnknownGroupElement(f"trivial group has no element {a!r}")


def zigzag_decode(n: int) -> int:
    """ω → ℤ along 0, -1, 1, -2, 2, …"""
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def zigzag_encode(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


class TranslationOracle(GroupOracle):
    """ℤ acting on itself by translation, carried to ω by the zig-zag pairing.

    Element k is the translation z ↦ z + k.  Unwindowed: evaluation is exact
    everywhere, and nonzero translations are fixed-point free.
    """

    def compose(self, a, b):
        return self._check(a) + self._check(b)

    def invert(self, a):
        return -self._check(a)

    def identity(self):
        return 0

    def is_identity(self, a) -> bool:
        return self._check(a) == 0

    def eval(self, a, n: int) -> int:
        return zigzag_encode(zigzag_decode(n) + self._check(a))

    def fixed_points(self, a) -> FixedPointReport:
        if self._check(a) == 0:
            return FixedPointReport(frozenset(), exact=True, all_naturals=True)
        return FixedPointReport(frozenset(), exact=True)

    def format_element(self, a) -> str:
        return str(self._check(a))

    def parse_element(self, text: str):
        try:
            return int(text)
        except ValueError:
            raise UnknownGroupElement(f"not a translation: {text!r}") from None

    def descriptor(self) -> dict:
        return {"kind": "translation"}

    @staticmethod
    def _check(a) -> int:
        if not isinstance(a, int) or isinstance(a, bool):
            raise UnknownGroupElement(f"not a translation: {a!r}")
        return a


def trivial_oracle() -> TrivialOracle:
    return TrivialOracle()


def translation_oracle() -> TranslationOracle:
    return TranslationOracle()


@dataclass
class CompletedStage:
    """A sealed construction stage: its injection has only closed orbits."""

    generator_index: int
    condition: F.Condition
    window: int
    trace: object = field(default=None, repr=False, compare=False)

    @property
    def injection(self) -> I.PartialInjection:
        return self.condition.s

    @property
    def target_bits(self) -> tuple[int, ...]:
        return self.condition.target


# staged elements: reduced words ((generator_index, exponent), ...) with
# nonzero exponents and distinct adjacent indices


def _reduce_staged(pairs) -> tuple[tuple[int, int], ...]:
    stack: list[list[int]] = []
    for idx, exp in pairs:
        if exp == 0:
            continue
        if stack and stack[-1][0] == idx:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([idx, exp])
    return tuple((i, e) for i, e in stack)


def _format_staged(elem) -> str:
    return "*".join(str(i) if e == 1 else f"{i}^{e}" for i, e in elem)


def _parse_staged(text: str):
    if not text:
        return ()
    pairs = []
    for token in text.split("*"):
        if "^" in token:
            idx, _, exp = token.partition("^")
            pairs.append((int(idx), int(exp)))
        else:
            pairs.append((int(token), 1))
    return _reduce_staged(pairs)


class StagedOracle(GroupOracle):
    """Reduced words in the stage generators, evaluated through their injections.

    Stage states are shared: an oracle built over a prefix of the stage list
    (as the growth machinery does) sees and contributes the same growth.
    """

    def __init__(self, stages: Sequence[CompletedStage]):
        self._stages = list(stages)

    def stages(self) -> list[CompletedStage]:
        return list(self._stages)

    def generator(self, index: int):
        if not 0 <= index < len(self._stages):
            raise UnknownGroupElement(f"no generator {index}")
        return ((index, 1),)

    def _check(self, a):
        if not isinstance(a, tuple):
            raise UnknownGroupElement(f"not a staged element: {a!r}")
        for pair in a:
            if not (isinstance(pair, tuple) and len(pair) == 2):
                raise UnknownGroupElement(f"not a staged element: {a!r}")
            idx, exp = pair
            if not 0 <= idx < len(self._stages) or exp == 0:
                raise UnknownGroupElement(f"bad letter {pair} in {a!r}")
        return a

    def compose(self, a, b):
        return _reduce_staged(list(self._check(a)) + list(self._check(b)))

    def invert(self, a):
        return tuple((i, -e) for i, e in reversed(self._check(a)))

    def identity(self):
        return ()

    def is_identity(self, a) -> bool:
        return self._check(a) == ()

    def eval(self, a, n: int) -> int:
        value = n
        for idx, exp in reversed(self._check(a)):
            s = self._stages[idx].condition.s
            for _ in range(abs(exp)):
                nxt = s.apply(value) if exp > 0 else s.apply_inverse(value)
                if nxt is None:
                    raise WindowTooSmall(
                        value + 1, f"generator {idx} unsettled at {value}"
                    )
                value = nxt
        return value

    def fixed_points(self, a) -> FixedPointReport:
        if self.is_identity(a):
            return FixedPointReport(frozenset(), exact=True, all_naturals=True)
        bound = self.window()
        points = frozenset(n for n in range(bound) if self.eval(a, n) == n)
        return FixedPointReport(points, exact=False, window=bound)

    def window(self) -> int:
        if not self._stages:
            return UNBOUNDED
        return min(stage.window for stage in self._stages)

    def grow_window(self, n: int) -> int:
        for index in range(len(self._stages)):
            self._grow_stage(index, n)
        return self.window()

    def _grow_stage(self, index: int, n: int):
        state = self._stages[index]
        if state.window >= n:
            return
        sub = StagedOracle(self._stages[:index])
        cond = state.condition
        attempts = 0

        def retrying(operation):
            nonlocal attempts
            while True:
                try:
                    return operation()
                except WindowTooSmall as e:
                    attempts += 1
                    if attempts > 16:
                        raise StageExtensionFailed(
                            f"stage {index} growth kept hitting window limits"
                        ) from e
                    sub.grow_window(max(e.required, 2 * sub.window()))
                except (F.PreconditionViolated, F.InternalCheckFailed) as exc:
                    raise StageExtensionFailed(
                        f"stage {index} growth broke its stored order: {exc}"
                    ) from exc

        for point in range(n):
            if cond.s.apply(point) is None:
                cond = retrying(lambda: F.extend_domain(cond, point, sub))
            if cond.s.apply_inverse(point) is None:
                cond = retrying(lambda: F.extend_range(cond, point, sub))
        cond = retrying(lambda: F.close_all_orbits(cond, sub))
        if not cond.s.extends(state.condition.s):
            raise StageExtensionFailed(f"stage {index} growth altered old values")
        new_window = I.mex(cond.s.support)
        if new_window < n:
            raise StageExtensionFailed(
                f"stage {index} growth reached window {new_window} < {n}"
            )
        state.condition = cond
        state.window = new_window

    def format_element(self, a) -> str:
        return _format_staged(self._check(a))

    def parse_element(self, text: str):
        return self._check(_parse_staged(text))

    def descriptor(self) -> dict:
        return {"kind": "staged", "stages": [stage_to_data(s) for s in self._stages]}


def staged_oracle(stages: Sequence[CompletedStage]) -> StagedOracle:
    return StagedOracle(stages)


def stage_to_data(stage: CompletedStage) -> dict:
    cond = stage.condition
    return {
        "generator_index": stage.generator_index,
        "injection": [list(p) for p in cond.s.pairs()],
        "words": sorted(
            _format_word_loose(w) for w in cond.words
        ),
        "target_bits": list(cond.target or ()),
        "window": stage.window,
    }


def _format_word_loose(w: W.Word) -> str:
    # like words.format_word but independent of any live stage list
    tokens = []
    for kind, handle, exp in W._runs(w):
        if kind == "g":
            tokens.append("g" + _format_staged(handle))
        elif exp == 1:
            tokens.append("x")
        else:
            tokens.append(f"x^{exp}")
    return ".".join(tokens)


def _parse_word_loose(text: str) -> W.Word:
    letters: list[W.Letter] = []
    text = text.strip()
    if not text:
        return W.IDENTITY_WORD
    for token in text.split("."):
        if token == "x":
            letters.append(W.X)
        elif token.startswith("x^"):
            letters.extend(W.x_power(int(token[2:])).letters)
        elif token.startswith("g"):
            letters.append(W.group(_parse_staged(token[1:])))
        else:
            raise ValueError(f"unrecognized word token: {token!r}")
    return W.Word(tuple(letters))


def stage_from_data(data: dict) -> CompletedStage:
    condition = F.Condition(
        I.injection_from_pairs(data["injection"]),
        frozenset(_parse_word_loose(text) for text in data["words"]),
        F.Flavor.DAGGER,
        tuple(int(b) for b in data["target_bits"]),
    )
    return CompletedStage(
        generator_index=int(data["generator_index"]),
        condition=condition,
        window=int(data["window"]),
    )


def oracle_from_descriptor(data: dict) -> GroupOracle:
    kind = data["kind"]
    if kind == "trivial":
        return trivial_oracle()
    if kind == "translation":
        return translation_oracle()
    if kind == "staged":
        return StagedOracle([stage_from_data(s) for s in data["stages"]])
    raise ValueError(f"unknown oracle kind {kind!r}")
