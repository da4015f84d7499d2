"""Injective trees: prefix-closed sets of injective finite sequences.

Explicit trees are finite node sets used for exact predicate checks.
Generated trees expose an extension oracle instead: given a node and a finite
forbidden set of (index, value) pairs, produce a strictly longer node avoiding
them.  Positivity (no finite family of function graphs covers the tree) is
undecidable from finite data in general, so generated trees promise it
through the oracle contract: they never refuse a finite forbidden set.
"""

from __future__ import annotations

from typing import Collection, Iterable, Mapping

from .errors import TreeRefusedExtension

Node = tuple[int, ...]


def _is_injective(node: Node) -> bool:
    return len(set(node)) == len(node)


class InjectiveTree:
    def contains(self, node: Node) -> bool:
        raise NotImplementedError

    def extend_avoiding(self, node: Node, forbidden: Collection[tuple[int, int]]) -> Node:
        """A strictly longer node avoiding every (index, value) constraint."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


class FullInjectiveTree(InjectiveTree):
    """All injective finite sequences; extension picks the least fresh value."""

    def contains(self, node: Node) -> bool:
        return all(v >= 0 for v in node) and _is_injective(node)

    def extend_avoiding(self, node: Node, forbidden: Collection[tuple[int, int]]) -> Node:
        blocked = set(node) | {v for i, v in forbidden if i == len(node)}
        value = 0
        while value in blocked:
            value += 1
        return node + (value,)

    def descriptor(self) -> dict:
        return {"kind": "full"}

    def __repr__(self) -> str:
        return "FullInjectiveTree()"


def _mix(seed: int, depth: int) -> int:
    # small deterministic integer hash; Python's hash() is salted per process
    h = (seed + 1) * 2654435761 + depth * 97531
    h ^= h >> 13
    return h & 0x7FFFFFFF


class SparseCongruenceTree(InjectiveTree):
    """Depth d admits only values in one residue class mod `modulus`.

    Each class is infinite, so every finite forbidden set can be avoided and
    the tree is positive; membership stays decidable from the node alone.
    """

    def __init__(self, seed: int, modulus: int = 7):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.seed = seed
        self.modulus = modulus

    def residue_at(self, depth: int) -> int:
        return _mix(self.seed, depth) % self.modulus

    def contains(self, node: Node) -> bool:
        if not _is_injective(node) or any(v < 0 for v in node):
            return False
        return all(v % self.modulus == self.residue_at(i) for i, v in enumerate(node))

    def extend_avoiding(self, node: Node, forbidden: Collection[tuple[int, int]]) -> Node:
        depth = len(node)
        blocked = set(node) | {v for i, v in forbidden if i == depth}
        value = self.residue_at(depth)
        while value in blocked:
            value += self.modulus
        return node + (value,)

    def descriptor(self) -> dict:
        return {"kind": "sparse", "seed": self.seed, "modulus": self.modulus}

    def __repr__(self) -> str:
        return f"SparseCongruenceTree(seed={self.seed}, modulus={self.modulus})"


class ExplicitTree(InjectiveTree):
    """A finite, prefix-closed set of injective nodes, kept sorted for output."""

    def __init__(self, nodes: Iterable[Iterable[int]]):
        node_set = {tuple(int(v) for v in node) for node in nodes}
        for node in node_set:
            if not _is_injective(node):
                raise ValueError(f"non-injective node {node}")
            if node and node[:-1] not in node_set:
                raise ValueError(f"missing prefix of {node}")
        if not node_set:
            node_set = {()}
        self._nodes = frozenset(node_set)

    @classmethod
    def from_branch(cls, branch: Iterable[int]) -> "ExplicitTree":
        branch = tuple(branch)
        return cls(branch[:i] for i in range(len(branch) + 1))

    @property
    def nodes(self) -> frozenset[Node]:
        return self._nodes

    def sorted_nodes(self) -> list[Node]:
        return sorted(self._nodes)

    def contains(self, node: Node) -> bool:
        return tuple(node) in self._nodes

    def strict_extensions(self, node: Node) -> list[Node]:
        node = tuple(node)
        k = len(node)
        return sorted(
            t for t in self._nodes if len(t) > k and t[:k] == node
        )

    def is_maximal(self, node: Node) -> bool:
        return not self.strict_extensions(node)

    def extend_avoiding(self, node: Node, forbidden: Collection[tuple[int, int]]) -> Node:
        node = tuple(node)
        banned = set(map(tuple, forbidden))
        candidates = sorted(self.strict_extensions(node), key=lambda t: (len(t), t))
        for t in candidates:
            if all((i, t[i]) not in banned for i in range(len(node), len(t))):
                return t
        raise TreeRefusedExtension(
            f"no extension of {node} avoids {sorted(banned)}"
        )

    def descriptor(self) -> dict:
        return {"kind": "explicit", "nodes": [list(n) for n in self.sorted_nodes()]}

    def __repr__(self) -> str:
        return f"ExplicitTree({len(self._nodes)} nodes)"


def tree_from_descriptor(data: Mapping) -> InjectiveTree:
    kind = data["kind"]
    if kind == "full":
        return FullInjectiveTree()
    if kind == "sparse":
        return SparseCongruenceTree(int(data["seed"]), int(data["modulus"]))
    if kind == "explicit":
        return ExplicitTree(data["nodes"])
    raise ValueError(f"unknown tree kind {kind!r}")


def truncate_to_explicit(tree: InjectiveTree, depth: int, value_bound: int) -> ExplicitTree:
    """All members of the tree with length ≤ depth and values < value_bound.

    Exponential in depth for dense trees; meant for small verification runs.
    """
    nodes = [()]
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            for v in range(value_bound):
                child = node + (v,)
                if tree.contains(child):
                    nxt.append(child)
        nodes.extend(nxt)
        frontier = nxt
    return ExplicitTree(nodes)


def diagonalization_witness(
    g: Mapping[int, int], tree: ExplicitTree, node: Node
) -> tuple[Node, int] | None:
    """Some strict extension t of node and new index k with t(k) = g(k)."""
    for t in sorted(tree.strict_extensions(node), key=lambda t: (len(t), t)):
        for k in range(len(node), len(t)):
            if k in g and t[k] == g[k]:
                return t, k
    return None


def densely_diagonalizes(g: Mapping[int, int], tree: ExplicitTree) -> bool:
    """Above every extendable node, some extension agrees with g at a new index.

    Maximal nodes are exempt: they admit no strict extension inside a finite
    truncation, so the quantifier runs over non-maximal nodes only.
    """
    return all(
        diagonalization_witness(g, tree, node) is not None
        for node in tree.nodes
        if not tree.is_maximal(node)
    )


def is_positive_explicit(tree: ExplicitTree, family: Iterable[Mapping[int, int]]) -> bool:
    """No finite truncation evidence that the family graphs cover the tree.

    True iff every non-maximal node has an extension stepping outside every
    family member's graph at some new index.
    """
    graphs = list(family)
    for node in tree.nodes:
        if tree.is_maximal(node):
            continue
        found = False
        for t in tree.strict_extensions(node):
            for k in range(len(node), len(t)):
                if all(f.get(k) != t[k] for f in graphs):
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True
