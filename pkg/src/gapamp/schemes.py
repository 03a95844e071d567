"""Per-node leaf orderings (schemes) and collision certificates.

A scheme assigns to every node of a full k-ary tree a bijection from the
leaves below that node onto 1..(their count), stored as a permutation
sequence indexed by local leaf rank.  A collision for a leaf set A at a
node u is a common index hit: one member of A under each child of u, all
mapped to the same value by the children's bijections.  In a composed
instance such a hit certifies that those requests would all have to route
through a single copy of the base instance.

Scheme text format (line oriented, '#' starts a comment):

    scheme <k> <d>
    <address>: p1 p2 ... pm   one line per node, breadth first

where <address> is 'root' or dot-joined digits such as '2.1.3', and the
j-th number is the image of the j-th leaf of that node's subtree in
lexicographic order.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import FormatError
from .trees import LeafSet, NodeAddress, TreeShape

from bisect import bisect_left, bisect_right


@dataclass(frozen=True)
class Scheme:
    """One permutation per tree node; entry j-1 is the image of local leaf rank j."""

    shape: TreeShape
    perms: dict[NodeAddress, tuple[int, ...]]
    _inv: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def apply(self, node: NodeAddress, leaf: NodeAddress) -> int:
        """Image of `leaf` under the bijection stored at `node` (an ancestor of it)."""
        return self.perms[node][self.shape.local_rank(node, leaf) - 1]

    def invert(self, node: NodeAddress, index: int) -> NodeAddress:
        """The unique leaf below `node` that maps to `index`."""
        inv = self._inv.get(node)
        if inv is None:
            perm = self.perms[node]
            inv = [0] * (len(perm) + 1)
            for rank, value in enumerate(perm, 1):
                inv[value] = rank
            self._inv[node] = inv
        lo, _ = self.shape.leaf_span(node)
        return self.shape.leaf_address(lo + inv[index] - 1)


def identity_scheme(shape: TreeShape) -> Scheme:
    return Scheme(
        shape,
        {
            node: tuple(range(1, shape.leaves_below(node) + 1))
            for node in shape.nodes_breadth_first()
        },
    )


def random_scheme(shape: TreeShape, seed: int) -> Scheme:
    """Uniform independent bijections, one Fisher-Yates shuffle per node.

    A single generator seeded with `seed` is consumed in breadth-first node
    order, so equal seeds give byte-identical schemes.
    """
    rng = random.Random(seed)
    perms: dict[NodeAddress, tuple[int, ...]] = {}
    for node in shape.nodes_breadth_first():
        values = list(range(1, shape.leaves_below(node) + 1))
        rng.shuffle(values)
        perms[node] = tuple(values)
    return Scheme(shape, perms)


def validate_scheme(scheme: Scheme) -> list[str]:
    """Coverage and bijectivity violations, empty when the scheme is well formed."""
    out: list[str] = []
    shape = scheme.shape
    expected = set(shape.nodes_breadth_first())
    for node in sorted(expected - scheme.perms.keys()):
        out.append(f"node {node}: missing bijection")
    for node in sorted(scheme.perms.keys() - expected):
        out.append(f"node {node}: not a node of the shape")
    for node in sorted(expected & scheme.perms.keys()):
        perm = scheme.perms[node]
        size = shape.leaves_below(node)
        if len(perm) != size:
            out.append(f"node {node}: expected {size} entries, found {len(perm)}")
        elif sorted(perm) != list(range(1, size + 1)):
            out.append(f"node {node}: not a bijection onto 1..{size}")
    return out


def subscheme(scheme: Scheme, child: int) -> Scheme:
    """Truncation to the subtree under the given root child; depth drops by one."""
    shape = scheme.shape
    if shape.d < 2:
        raise ValueError("cannot truncate a depth-1 shape")
    if not 1 <= child <= shape.k:
        raise ValueError(f"child {child} out of range 1..{shape.k}")
    perms = {
        node[1:]: perm
        for node, perm in scheme.perms.items()
        if node and node[0] == child
    }
    return Scheme(TreeShape(shape.k, shape.d - 1), perms)


def _address_label(node: NodeAddress) -> str:
    return "root" if not node else ".".join(map(str, node))


def serialize_scheme(scheme: Scheme) -> str:
    shape = scheme.shape
    lines = [f"scheme {shape.k} {shape.d}"]
    for node in shape.nodes_breadth_first():
        lines.append(f"{_address_label(node)}: " + " ".join(map(str, scheme.perms[node])))
    return "\n".join(lines) + "\n"


def parse_scheme(text: str) -> Scheme:
    shape: TreeShape | None = None
    perms: dict[NodeAddress, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if shape is None:
            fields = line.split()
            if len(fields) != 3 or fields[0] != "scheme":
                raise FormatError(lineno, "header must be 'scheme <k> <d>'")
            try:
                shape = TreeShape(int(fields[1]), int(fields[2]))
            except ValueError as exc:
                raise FormatError(lineno, str(exc)) from None
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(lineno, "expected '<address>: p1 p2 ...'")
        label = head.strip()
        if label == "root":
            node: NodeAddress = ()
        else:
            try:
                node = tuple(int(tok) for tok in label.split("."))
            except ValueError:
                raise FormatError(lineno, f"bad node address {label!r}") from None
        if not shape.is_node(node):
            raise FormatError(lineno, f"{label!r} is not a node of the shape")
        if node in perms:
            raise FormatError(lineno, f"duplicate node {label!r}")
        try:
            perm = tuple(int(tok) for tok in rest.split())
        except ValueError:
            raise FormatError(lineno, "permutation entries must be integers") from None
        size = shape.leaves_below(node)
        if len(perm) != size:
            raise FormatError(lineno, f"node {label!r}: expected {size} entries, found {len(perm)}")
        if sorted(perm) != list(range(1, size + 1)):
            raise FormatError(lineno, f"node {label!r}: not a bijection onto 1..{size}")
        perms[node] = perm
    if shape is None:
        raise FormatError(1, "missing 'scheme' header")
    scheme = Scheme(shape, perms)
    problems = validate_scheme(scheme)
    if problems:
        raise FormatError(len(text.splitlines()) or 1, problems[0])
    return scheme


@dataclass(frozen=True)
class CollisionCertificate:
    """A common index hit at `node`: one witness leaf per child, in child order."""

    node: NodeAddress
    common_index: int
    witnesses: tuple[NodeAddress, ...]


def _require_same_shape(members: LeafSet, scheme: Scheme) -> TreeShape:
    if members.shape != scheme.shape:
        raise ValueError(f"leaf set shape {members.shape} differs from scheme shape {scheme.shape}")
    return scheme.shape


def find_collision(members: LeafSet, scheme: Scheme) -> CollisionCertificate | None:
    """First collision in (node lexicographic, index ascending) scan order, or None.

    For each internal node the member images under every child bijection
    are intersected; a surviving index is a collision.  Runs in
    O(d * |members|) set operations overall.
    """
    shape = _require_same_shape(members, scheme)
    nums = members.numbers
    for node in shape.internal_nodes():
        common: set[int] | None = None
        children = shape.children(node)
        for child in children:
            lo, hi = shape.leaf_span(child)
            i, j = bisect_left(nums, lo), bisect_right(nums, hi)
            if i == j:
                common = None
                break
            perm = scheme.perms[child]
            images = {perm[x - lo] for x in nums[i:j]}
            common = images if common is None else common & images
            if not common:
                common = None
                break
        if common:
            x = min(common)
            witnesses = tuple(scheme.invert(child, x) for child in children)
            return CollisionCertificate(node, x, witnesses)
    return None


def verify_certificate(
    members: LeafSet, scheme: Scheme, cert: CollisionCertificate
) -> bool:
    """Check membership, per-child descent structure and index equality."""
    shape = scheme.shape
    if members.shape != shape:
        return False
    node = tuple(cert.node)
    if not shape.is_node(node) or shape.is_leaf(node):
        return False
    children = shape.children(node)
    if len(cert.witnesses) != len(children):
        return False
    if not 1 <= cert.common_index <= shape.leaves_below(children[0]):
        return False
    for child, leaf in zip(children, cert.witnesses):
        if not shape.is_leaf(leaf) or leaf[: len(child)] != child:
            return False
        if leaf not in members:
            return False
        if scheme.apply(child, leaf) != cert.common_index:
            return False
    return True


def brute_force_collisions(members: LeafSet, scheme: Scheme) -> list[CollisionCertificate]:
    """All collisions by direct witness-tuple enumeration; tiny shapes only.

    Works straight from the definition (every combination of one member per
    child), so it is the oracle for find_collision.  The returned list is
    ordered by (node lexicographic, index ascending); find_collision returns
    None exactly when this list is empty.
    """
    shape = _require_same_shape(members, scheme)
    if shape.leaf_count > 64:
        raise ValueError(f"brute-force scan limited to k**d <= 64, got {shape.leaf_count}")
    certs: list[CollisionCertificate] = []
    for node in shape.internal_nodes():
        children = shape.children(node)
        pools = []
        for child in children:
            lo, hi = shape.leaf_span(child)
            pools.append(
                [
                    shape.leaf_address(x)
                    for x in range(lo, hi + 1)
                    if shape.leaf_address(x) in members
                ]
            )
        hits: dict[int, tuple[NodeAddress, ...]] = {}
        for combo in itertools.product(*pools):
            values = {scheme.apply(child, leaf) for child, leaf in zip(children, combo)}
            if len(values) == 1:
                hits[values.pop()] = tuple(combo)
        for x in sorted(hits):
            certs.append(CollisionCertificate(node, x, hits[x]))
    return certs
