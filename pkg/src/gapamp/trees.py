"""Full k-ary tree addressing and leaf-set density.

Nodes are addressed by digit tuples over 1..k; the root is the empty tuple
and leaves are the tuples of length d.  Leaves are numbered 1..k**d in
lexicographic address order, so every subtree owns one contiguous block of
leaf numbers and membership counts reduce to binary searches.

Leaf-set text format (line oriented, '#' starts a comment):

    leafset <k> <d>
    <leaf number>        one per line, ascending in canonical form
"""

from __future__ import annotations

import itertools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .errors import FormatError

NodeAddress = tuple[int, ...]

ROOT: NodeAddress = ()


@dataclass(frozen=True)
class TreeShape:
    """Full k-ary rooted tree of depth d."""

    k: int
    d: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"arity must be at least 1, got {self.k}")
        if self.d < 1:
            raise ValueError(f"depth must be at least 1, got {self.d}")

    @property
    def leaf_count(self) -> int:
        return self.k**self.d

    def is_node(self, node: NodeAddress) -> bool:
        return len(node) <= self.d and all(1 <= digit <= self.k for digit in node)

    def is_leaf(self, node: NodeAddress) -> bool:
        return len(node) == self.d and self.is_node(node)

    def children(self, node: NodeAddress) -> list[NodeAddress]:
        if len(node) >= self.d:
            return []
        return [node + (i,) for i in range(1, self.k + 1)]

    def leaves_below(self, node: NodeAddress) -> int:
        return self.k ** (self.d - len(node))

    def leaf_span(self, node: NodeAddress) -> tuple[int, int]:
        """Inclusive range of leaf numbers under `node`."""
        lo = 1
        for depth, digit in enumerate(node, 1):
            lo += (digit - 1) * self.k ** (self.d - depth)
        return lo, lo + self.leaves_below(node) - 1

    def leaf_number(self, leaf: NodeAddress) -> int:
        if len(leaf) != self.d:
            raise ValueError(f"{leaf!r} is not a leaf address of depth {self.d}")
        return self.leaf_span(leaf)[0]

    def leaf_address(self, number: int) -> NodeAddress:
        if not 1 <= number <= self.leaf_count:
            raise ValueError(f"leaf number {number} out of range 1..{self.leaf_count}")
        rem = number - 1
        digits = []
        for depth in range(1, self.d + 1):
            block = self.k ** (self.d - depth)
            digits.append(rem // block + 1)
            rem %= block
        return tuple(digits)

    def local_rank(self, node: NodeAddress, leaf: NodeAddress) -> int:
        """1-based lexicographic position of `leaf` among the leaves under `node`."""
        if leaf[: len(node)] != tuple(node):
            raise ValueError(f"{leaf!r} is not below {node!r}")
        return self.leaf_number(leaf) - self.leaf_span(node)[0] + 1

    def layer(self, depth: int) -> Iterator[NodeAddress]:
        """Nodes of the given depth in lexicographic order."""
        if not 0 <= depth <= self.d:
            raise ValueError(f"depth {depth} out of range 0..{self.d}")
        return itertools.product(range(1, self.k + 1), repeat=depth)

    def internal_nodes(self) -> Iterator[NodeAddress]:
        """All non-leaf nodes in lexicographic (preorder) address order."""

        def rec(prefix: NodeAddress) -> Iterator[NodeAddress]:
            yield prefix
            if len(prefix) < self.d - 1:
                for i in range(1, self.k + 1):
                    yield from rec(prefix + (i,))

        return rec(ROOT)

    def nodes_breadth_first(self) -> Iterator[NodeAddress]:
        for depth in range(self.d + 1):
            yield from self.layer(depth)


def leaf_addresses(shape: TreeShape) -> list[NodeAddress]:
    """All k**d leaf addresses in lexicographic order; position = leaf number."""
    return list(itertools.product(range(1, shape.k + 1), repeat=shape.d))


@dataclass(frozen=True)
class LeafSet:
    """A subset of the leaves of a tree shape."""

    shape: TreeShape
    members: frozenset[NodeAddress]

    def __post_init__(self):
        members = frozenset(tuple(m) for m in self.members)
        for m in members:
            if not self.shape.is_leaf(m):
                raise ValueError(f"{m!r} is not a leaf of {self.shape}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_numbers(cls, shape: TreeShape, numbers: Iterable[int]) -> "LeafSet":
        nums = sorted({int(x) for x in numbers})
        out = cls(shape, frozenset(shape.leaf_address(x) for x in nums))
        out.__dict__["numbers"] = tuple(nums)
        return out

    @cached_property
    def numbers(self) -> tuple[int, ...]:
        return tuple(sorted(self.shape.leaf_number(a) for a in self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, leaf: NodeAddress) -> bool:
        return tuple(leaf) in self.members

    def count_below(self, node: NodeAddress) -> int:
        """Number of members in the subtree of `node` (binary search, no scan)."""
        lo, hi = self.shape.leaf_span(node)
        nums = self.numbers
        return bisect_right(nums, hi) - bisect_left(nums, lo)


def leaf_fraction(members: LeafSet, node: NodeAddress) -> Fraction:
    """Exact fraction of the leaves under `node` that belong to the set."""
    return Fraction(members.count_below(node), members.shape.leaves_below(node))


def serialize_leafset(members: LeafSet) -> str:
    shape = members.shape
    lines = [f"leafset {shape.k} {shape.d}"]
    lines.extend(str(x) for x in members.numbers)
    return "\n".join(lines) + "\n"


def parse_leafset(text: str) -> LeafSet:
    shape = None
    numbers: list[int] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "leafset":
            if shape is not None:
                raise FormatError(lineno, "duplicate leafset header")
            if len(fields) != 3:
                raise FormatError(lineno, "header must be 'leafset <k> <d>'")
            try:
                shape = TreeShape(int(fields[1]), int(fields[2]))
            except ValueError as exc:
                raise FormatError(lineno, str(exc)) from None
            continue
        if shape is None:
            raise FormatError(lineno, "leaf numbers before header")
        for tok in fields:
            try:
                num = int(tok)
            except ValueError:
                raise FormatError(lineno, f"not a leaf number: {tok!r}") from None
            if not 1 <= num <= shape.leaf_count:
                raise FormatError(lineno, f"leaf number {num} out of range 1..{shape.leaf_count}")
            if num in seen:
                raise FormatError(lineno, f"duplicate leaf number {num}")
            seen.add(num)
            numbers.append(num)
    if shape is None:
        raise FormatError(1, "missing 'leafset' header")
    return LeafSet.from_numbers(shape, numbers)
