"""Finite partial injections on the naturals and their orbit combinatorics.

An orbit is the smallest set containing a point and closed under the map and
its inverse.  Orbits contained in dom ∩ ran are cycles ("closed"); the rest
are paths with a unique entry point (not in the range) and exit point (not in
the domain).  Two bit-coding maps live here: one reads parities of closed
orbit sizes in min-order, the other counts closed orbits of prime sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from . import words as W
from .errors import NotNiceInjection, PrefixTooShort


class PartialInjection:
    """Immutable finite injective partial map ω → ω with inverse lookup."""

    __slots__ = ("_fwd", "_bwd")

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        fwd: dict[int, int] = {}
        bwd: dict[int, int] = {}
        for n, m in pairs:
            if n < 0 or m < 0:
                raise ValueError(f"negative point in pair ({n}, {m})")
            if n in fwd and fwd[n] != m:
                raise ValueError(f"{n} mapped twice: {fwd[n]} and {m}")
            if m in bwd and bwd[m] != n:
                raise ValueError(f"{m} hit twice: by {bwd[m]} and {n}")
            fwd[n] = m
            bwd[m] = n
        self._fwd = fwd
        self._bwd = bwd

    @classmethod
    def empty(cls) -> "PartialInjection":
        return cls()

    def apply(self, n: int) -> int | None:
        return self._fwd.get(n)

    def apply_inverse(self, m: int) -> int | None:
        return self._bwd.get(m)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self._fwd)

    @property
    def range(self) -> frozenset[int]:
        return frozenset(self._bwd)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._fwd) | frozenset(self._bwd)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self._fwd.items()))

    def as_dict(self) -> dict[int, int]:
        return dict(self._fwd)

    def with_pair(self, n: int, m: int) -> "PartialInjection":
        if n in self._fwd:
            raise ValueError(f"{n} already in domain")
        if m in self._bwd:
            raise ValueError(f"{m} already in range")
        return PartialInjection(list(self._fwd.items()) + [(n, m)])

    def with_pairs(self, new: Iterable[tuple[int, int]]) -> "PartialInjection":
        return PartialInjection(list(self._fwd.items()) + list(new))

    def inverse(self) -> "PartialInjection":
        return PartialInjection((m, n) for n, m in self._fwd.items())

    def extends(self, other: "PartialInjection") -> bool:
        return all(self._fwd.get(n) == m for n, m in other._fwd.items())

    def __len__(self) -> int:
        return len(self._fwd)

    def __bool__(self) -> bool:
        return bool(self._fwd)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialInjection):
            return NotImplemented
        return self._fwd == other._fwd

    def __hash__(self) -> int:
        return hash(frozenset(self._fwd.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}->{m}" for n, m in self.pairs())
        return f"PartialInjection({{{inner}}})"


@dataclass(frozen=True)
class Orbit:
    """One orbit: `ordered` walks entry → exit (open) or starts at min (closed)."""

    ordered: tuple[int, ...]
    closed: bool

    @property
    def elements(self) -> frozenset[int]:
        return frozenset(self.ordered)

    @property
    def size(self) -> int:
        return len(self.ordered)

    @property
    def minimum(self) -> int:
        return min(self.ordered)

    @property
    def entry(self) -> int | None:
        """n₋, the unique point outside the range; None when closed."""
        return None if self.closed else self.ordered[0]

    @property
    def exit(self) -> int | None:
        """n₊, the unique point outside the domain; None when closed."""
        return None if self.closed else self.ordered[-1]

    def to_report(self) -> dict:
        report: dict = {"elements": sorted(self.ordered), "closed": self.closed}
        if not self.closed:
            report["n_minus"] = self.entry
            report["n_plus"] = self.exit
        return report


def orbit_of(s: PartialInjection, n: int) -> Orbit:
    """The orbit through n. Points outside dom ∪ ran give open singletons."""
    back = n
    seen = {n}
    while True:
        prev = s.apply_inverse(back)
        if prev is None:
            # path: walk forward from the entry point
            chain = [back]
            cur = back
            while (nxt := s.apply(cur)) is not None:
                chain.append(nxt)
                cur = nxt
            return Orbit(tuple(chain), closed=False)
        if prev in seen:
            break
        seen.add(prev)
        back = prev
    # cycle: start the walk at the minimum for a canonical order
    start = min(seen)
    chain = [start]
    cur = s.apply(start)
    while cur != start:
        chain.append(cur)
        cur = s.apply(cur)
    return Orbit(tuple(chain), closed=True)


def orbit_decomposition(s: PartialInjection) -> tuple[Orbit, ...]:
    """All orbits meeting dom ∪ ran, sorted by minimum element."""
    remaining = set(s.support)
    out = []
    while remaining:
        orbit = orbit_of(s, min(remaining))
        out.append(orbit)
        remaining -= orbit.elements
    return tuple(sorted(out, key=lambda o: o.minimum))


def closed_orbits(s: PartialInjection) -> tuple[Orbit, ...]:
    return tuple(o for o in orbit_decomposition(s) if o.closed)


def open_orbits(s: PartialInjection) -> tuple[Orbit, ...]:
    return tuple(o for o in orbit_decomposition(s) if not o.closed)


def mex(values: Iterable[int]) -> int:
    """Least natural number not in `values`."""
    taken = set(values)
    n = 0
    while n in taken:
        n += 1
    return n


def is_nice_injection(s: PartialInjection) -> bool:
    """Every closed orbit's minimum lies below the first gap in their union.

    This pins down the enumeration order of closed orbits: new closed orbits
    must keep covering an initial segment's worth of minima.
    """
    closed = closed_orbits(s)
    if not closed:
        return True
    covered = set()
    for o in closed:
        covered |= o.elements
    gap = mex(covered)
    return all(o.minimum < gap for o in closed)


def o_partial(s: PartialInjection) -> tuple[int, ...]:
    """Size parities of closed orbits in min-order; the orbit-order code."""
    if not is_nice_injection(s):
        raise NotNiceInjection(f"closed-orbit minima not initial in {s!r}")
    return tuple(o.size % 2 for o in closed_orbits(s))


_PRIMES: list[int] = [2, 3, 5, 7]


def nth_prime(n: int) -> int:
    """p_n with p_0 = 2."""
    while len(_PRIMES) <= n:
        candidate = _PRIMES[-1] + 2
        while any(candidate % p == 0 for p in _PRIMES if p * p <= candidate):
            candidate += 2
        _PRIMES.append(candidate)
    return _PRIMES[n]


def prime_index(k: int) -> int | None:
    """n with p_n = k, or None if k is not prime."""
    if k < 2:
        return None
    n = 0
    while nth_prime(n) < k:
        n += 1
    return n if nth_prime(n) == k else None


def o_dagger(s: PartialInjection, upto: int) -> tuple[int, ...]:
    """Bit n is the parity of the count of closed orbits of size p_n, n ≤ upto."""
    counts: dict[int, int] = {}
    for o in closed_orbits(s):
        counts[o.size] = counts.get(o.size, 0) + 1
    return tuple(counts.get(nth_prime(n), 0) % 2 for n in range(upto + 1))


def codes_up_to(s: PartialInjection, r: tuple[int, ...], n: int) -> bool:
    """Whether the prime-parity code of s agrees with r on bits 0..n."""
    if len(r) <= n:
        raise PrefixTooShort(f"target has {len(r)} bits, need {n + 1}")
    return tuple(r[: n + 1]) == o_dagger(s, n)


def fixed_points(w: W.Word, s: PartialInjection, oracle, bound: int) -> frozenset[int]:
    """Points n with w[s](n) = n, scanning dom(s) ∪ ran(s) ∪ [0, bound).

    Exact for any word whose rightmost or leftmost letter is x or x^-1 (a
    fixed point's evaluation then starts or ends inside the support), hence
    for every admissible word.  Pure group words defer to the oracle; the
    identity word fixes everything, so the scanned set itself is returned.
    """
    reduced = W.reduce(w.letters, oracle)
    scan = set(s.support) | set(range(bound))
    if reduced.is_identity:
        return frozenset(scan)
    if reduced.x_count() == 0:
        # a single group letter after reduction
        report = oracle.fixed_points(reduced.letters[0].handle)
        if report.all_naturals:
            return frozenset(scan)
        return frozenset(report.points)
    out = set()
    for n in scan:
        if W.evaluate(reduced, s, oracle, n) == n:
            out.add(n)
    return frozenset(out)


def word_graph(w: W.Word, s: PartialInjection, oracle) -> PartialInjection:
    """The graph of w[s] as a finite partial injection.

    Scans dom(s) ∪ ran(s); complete whenever w's rightmost letter is x or
    x^-1, which holds for every admissible word and their inverses.
    """
    pairs = []
    for n in sorted(s.support):
        value = W.evaluate(w, s, oracle, n)
        if value is not None:
            pairs.append((n, value))
    return PartialInjection(pairs)


def injection_from_pairs(pairs: Iterable[Iterable[int]]) -> PartialInjection:
    """Build from serialized [[n, m], …] data."""
    return PartialInjection((int(n), int(m)) for n, m in pairs)
