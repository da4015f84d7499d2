"""Independent brute-force reference implementations for the tests.

Everything here is deliberately written from scratch against the documented
behavior, without importing the package, so expected values come from a
second code path.
"""

from __future__ import annotations

import random

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def cycle_sizes(perm: tuple[int, ...]) -> list[int]:
    """Cycle type of a total permutation given as a value tuple."""
    seen = [False] * len(perm)
    sizes = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        size = 0
        cur = start
        while not seen[cur]:
            seen[cur] = True
            cur = perm[cur]
            size += 1
        sizes.append(size)
    return sizes


def parity_bits(perm: tuple[int, ...], upto: int) -> tuple[int, ...]:
    """Bit n is the count of cycles of size PRIMES[n], mod 2."""
    sizes = cycle_sizes(perm)
    return tuple(sum(1 for z in sizes if z == PRIMES[n]) % 2 for n in range(upto + 1))


def compose(f: tuple[int, ...], g: tuple[int, ...]) -> tuple[int, ...]:
    """f after g, both total on the same range."""
    return tuple(f[g[i]] for i in range(len(g)))


def perm_power(f: tuple[int, ...], k: int) -> tuple[int, ...]:
    out = tuple(range(len(f)))
    for _ in range(k):
        out = compose(f, out)
    return out


def closed_cycle_sizes_of_mapping(graph: dict[int, int]) -> list[int]:
    """Sizes of the cycles of a partial injection given as a dict.

    A cycle is a maximal forward walk that returns to its start without
    leaving the mapping.
    """
    seen: set[int] = set()
    sizes = []
    for start in graph:
        if start in seen:
            continue
        cur = start
        trail = []
        while cur in graph and cur not in seen and cur not in trail:
            trail.append(cur)
            cur = graph[cur]
        if trail and cur == trail[0]:
            seen.update(trail)
            sizes.append(len(trail))
        else:
            seen.update(trail)
    return sizes


def zig(n: int) -> int:
    """The n-th integer in the order 0, -1, 1, -2, 2, ..."""
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def zag(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def random_injection(rng: random.Random, size: int, span: int) -> dict[int, int]:
    """A random partial injection with at most `size` pairs below `span`."""
    points = list(range(span))
    rng.shuffle(points)
    dom = sorted(rng.sample(range(span), k=min(size, span)))
    out = {}
    for n in dom:
        if points:
            out[n] = points.pop()
    return out
