"""Density-guided node selection inside leaf sets.

Fractions are exact rationals throughout, so threshold comparisons such as
"at least 1/(2q)" never suffer float error.  Exponents of the form
c*k*log2(k) are rounded up to the next integer before exponentiation when
they are not already integral (they are exactly integral when k is a power
of two), which keeps every formula in exact integer arithmetic while only
weakening bounds in the safe direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .trees import LeafSet, NodeAddress, TreeShape, leaf_fraction


def _ceil_log2_power(base: int, exponent: int) -> int:
    """Smallest integer e with 2**e >= base**exponent, computed exactly."""
    return (base**exponent - 1).bit_length()


def descent_step_budget(k: int, q: int) -> int:
    """ceil(2k * log2(2q)): the window within which greedy_descend must stop."""
    return _ceil_log2_power(2 * q, 2 * k)


def required_depth(k: int, q: int) -> int:
    """Tree depth at which a universal scheme is guaranteed to exist.

    Evaluates ceil(k * (4q)**(4k*log2(k))) exactly.  For k a power of two
    the exponent is exact; otherwise it is rounded up conservatively.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    return k * (4 * q) ** _ceil_log2_power(k, 4 * k)


def dense_cover_leaf_bound(shape: TreeShape, q: int) -> Fraction:
    """Guaranteed total leaves under dense_node_cover output.

    d * k**d / (4q)**(3k*log2(k)), with the exponent rounded up when k is
    not a power of two (a slightly weaker but exactly representable bound).
    """
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    denom = (4 * q) ** _ceil_log2_power(shape.k, 3 * shape.k)
    return Fraction(shape.d * shape.leaf_count, denom)


@dataclass(frozen=True)
class DescentResult:
    """Outcome of a greedy density walk.

    `trail` lists every visited node starting at the walk's origin, with
    the matching member fractions in `trail_fractions`.  Precondition or
    stopping-guarantee problems land in `violations`; the walk itself is
    always carried out so the result stays usable for diagnostics.
    """

    node: NodeAddress
    trail: tuple[NodeAddress, ...]
    trail_fractions: tuple[Fraction, ...]
    violations: tuple[str, ...]

    @property
    def steps(self) -> int:
        return len(self.trail) - 1

    @property
    def ok(self) -> bool:
        return not self.violations


def greedy_descend(members: LeafSet, start: NodeAddress, q: int, tau: int) -> DescentResult:
    """Walk toward denser children until every child holds at least 1/(2q).

    From a start node holding at least a 1/q member fraction, repeatedly
    move to the child with the largest fraction (ties go to the smallest
    child index) and stop at the first node all of whose children reach
    1/(2q).  Each step past a node that fails the stopping rule multiplies
    the fraction by at least 1 + 1/(2k-2), which forces a stop within
    tau - 1 steps whenever the preconditions hold.
    """
    shape = members.shape
    start = tuple(start)
    if not shape.is_node(start):
        raise ValueError(f"{start!r} is not a node of {shape}")
    violations: list[str] = []
    if shape.k < 2 or q < 2:
        violations.append(f"need k >= 2 and q >= 2, got k={shape.k} q={q}")
    if q ** (2 * shape.k) > 2**tau:
        violations.append(f"tau={tau} is below 2k*log2(q)")
    if len(start) > shape.d - tau:
        violations.append(f"start depth {len(start)} exceeds d - tau = {shape.d - tau}")
    if leaf_fraction(members, start) < Fraction(1, q):
        violations.append(f"start node holds less than a 1/{q} fraction")

    stop_at = Fraction(1, 2 * q)
    node = start
    trail = [node]
    fracs = [leaf_fraction(members, node)]
    while True:
        children = shape.children(node)
        if not children:
            break
        child_fracs = [(child, leaf_fraction(members, child)) for child in children]
        if all(f >= stop_at for _, f in child_fracs):
            break
        best = max(f for _, f in child_fracs)
        node = min(child for child, f in child_fracs if f == best)
        trail.append(node)
        fracs.append(best)
    if len(trail) - 1 > tau - 1:
        violations.append(f"walk took {len(trail) - 1} steps, guarantee is {tau - 1}")
    return DescentResult(node, tuple(trail), tuple(fracs), tuple(violations))


def dense_node_cover(members: LeafSet, q: int) -> frozenset[NodeAddress]:
    """Distinct nodes whose children all hold at least 1/(4q), covering many leaves.

    Layers 0, tau, 2*tau, ... are scanned with tau = descent_step_budget(k, q);
    in each layer the nodes holding at least 1/(2q) (at least a 1/(2q)
    fraction of the layer, by averaging) are refined by greedy descent at
    doubled q.  Because consecutive scanned layers are tau apart, the walks
    stay in disjoint subtree windows and the selected nodes are distinct.
    The total number of leaves under the result is at least
    dense_cover_leaf_bound(shape, q).

    Requires k, q >= 2, depth d >= 4kq, and a member set holding at least a
    1/q fraction of all leaves.
    """
    shape = members.shape
    k, d = shape.k, shape.d
    if k < 2 or q < 2:
        raise ValueError(f"need k >= 2 and q >= 2, got k={k} q={q}")
    if d < 4 * k * q:
        raise ValueError(f"need depth at least 4kq = {4 * k * q}, got {d}")
    if len(members) * q < shape.leaf_count:
        raise ValueError(f"member set holds less than a 1/{q} fraction of the leaves")
    tau = descent_step_budget(k, q)
    select_at = Fraction(1, 2 * q)
    cover: set[NodeAddress] = set()
    for j in range(d // tau):
        for node in shape.layer(j * tau):
            if leaf_fraction(members, node) >= select_at:
                cover.add(greedy_descend(members, node, 2 * q, tau).node)
    return frozenset(cover)
