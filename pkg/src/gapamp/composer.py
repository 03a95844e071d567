"""Layered self-composition of an instance along a full k-ary tree.

compose(base, scheme) builds d * k**(d-1) relabeled copies of the base
instance, one per (internal tree node, block index) pair, and wires
consecutive layers through the scheme's bijections.  The request indexed
by leaf number i starts in a layer-1 copy and ends in a layer-d copy; the
copy chain and both terminals follow closed-form rules per leaf, which is
how the construction stays iterative for any depth.

Vertex layout: copy blocks are allocated depth first (child subtrees in
order, then the owning node's own block), and the c-th allocated copy of a
base instance with n vertices occupies ids (c-1)*n+1 .. c*n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .instances import DagInstance, Digraph, Request, validate_instance
from .schemes import Scheme
from .solver import PathSolution, verify_solution
from .trees import ROOT, NodeAddress, TreeShape


@dataclass(frozen=True)
class CopyRecord:
    """One copy of the base instance inside a composed instance."""

    owner: NodeAddress  # internal node whose block the copy belongs to
    index: int  # 1-based position inside the owner's block
    layer: int  # 1 = hosts composed sources, d = hosts composed sinks
    offset: int  # copy vertices occupy offset+1 .. offset+n


@dataclass(frozen=True)
class ComposedInstance:
    instance: DagInstance
    shape: TreeShape
    leaf_request_map: dict[NodeAddress, int]  # leaf address -> request index
    copy_map: tuple[CopyRecord, ...]

    @cached_property
    def copy_offsets(self) -> dict[tuple[NodeAddress, int], int]:
        return {(c.owner, c.index): c.offset for c in self.copy_map}


def _copy_order(shape: TreeShape) -> list[tuple[NodeAddress, int]]:
    """Depth-first block layout: child subtrees first, then the node's block."""
    out: list[tuple[NodeAddress, int]] = []

    def rec(node: NodeAddress) -> None:
        if len(node) < shape.d - 1:
            for child in shape.children(node):
                rec(child)
        out.extend((node, x) for x in range(1, shape.leaves_below(node) // shape.k + 1))

    rec(ROOT)
    return out


def _copy_chain(
    shape: TreeShape, scheme: Scheme, leaf: NodeAddress
) -> list[tuple[tuple[NodeAddress, int], int]]:
    """The ((owner, index), local request) chain a leaf's request runs through.

    Entry j-1 is the layer-j copy; the local request there is the leaf's
    (d-j+1)-th address digit.  Layer 1 is the single copy under the leaf's
    parent; every later copy is selected by the bijection at the chain
    node one level up.
    """
    d = shape.d
    chain = []
    for j in range(1, d + 1):
        owner = leaf[: d - j]
        index = 1 if j == 1 else scheme.apply(leaf[: d - j + 1], leaf)
        chain.append(((owner, index), leaf[d - j]))
    return chain


def compose(base: DagInstance, scheme: Scheme) -> ComposedInstance:
    """Build the scheme-guided layered composition of `base`.

    The result has k**d requests indexed by canonical leaf number,
    d * k**(d-1) copies and (d-1) * k**d inter-layer arcs, and is acyclic
    whenever `base` is.  Raises ValueError on arity mismatch or an invalid
    base instance.
    """
    shape = scheme.shape
    if base.k != shape.k:
        raise ValueError(
            f"scheme arity {shape.k} does not match instance request count {base.k}"
        )
    problems = validate_instance(base)
    if problems:
        raise ValueError("base instance is invalid: " + "; ".join(problems))

    n = base.graph.n
    order = _copy_order(shape)
    offsets = {key: i * n for i, key in enumerate(order)}
    copies = tuple(
        CopyRecord(owner, x, shape.d - len(owner), offsets[(owner, x)])
        for owner, x in order
    )

    arcs: list[tuple[int, int]] = []
    for off in offsets.values():
        arcs.extend((u + off, v + off) for u, v in base.graph.arcs)

    requests: list[Request] = []
    leaf_map: dict[NodeAddress, int] = {}
    for num in range(1, shape.leaf_count + 1):
        leaf = shape.leaf_address(num)
        leaf_map[leaf] = num
        chain = _copy_chain(shape, scheme, leaf)
        (first_key, first_req), (last_key, last_req) = chain[0], chain[-1]
        requests.append(
            Request(
                base.requests[first_req - 1].source + offsets[first_key],
                base.requests[last_req - 1].sink + offsets[last_key],
            )
        )
        for (key_a, req_a), (key_b, req_b) in zip(chain, chain[1:]):
            arcs.append(
                (
                    base.requests[req_a - 1].sink + offsets[key_a],
                    base.requests[req_b - 1].source + offsets[key_b],
                )
            )

    graph = Digraph(len(order) * n, tuple(arcs))
    return ComposedInstance(DagInstance(graph, tuple(requests)), shape, leaf_map, copies)


def lift_solution(
    base: DagInstance,
    full_solution: PathSolution,
    scheme: Scheme,
    composed: ComposedInstance,
) -> PathSolution:
    """Serve every composed request by chaining copy-local paths of `full_solution`.

    `full_solution` must serve all requests of `base` and verify.  The path
    for leaf number i concatenates, across the copies in its chain, the
    relabeled base paths, joined by the inter-layer arcs; the output passes
    verify_solution on the composed instance with every request required.
    """
    ok, problems = verify_solution(base, full_solution, range(1, base.k + 1))
    if not ok:
        raise ValueError("base solution does not serve all requests: " + "; ".join(problems))
    shape = composed.shape
    if scheme.shape != shape:
        raise ValueError(f"scheme shape {scheme.shape} differs from composed shape {shape}")
    by_index = {i: seq for i, seq in full_solution.paths}
    offsets = composed.copy_offsets
    paths: list[tuple[int, tuple[int, ...]]] = []
    for num in range(1, shape.leaf_count + 1):
        leaf = shape.leaf_address(num)
        verts: list[int] = []
        for key, local_req in _copy_chain(shape, scheme, leaf):
            off = offsets[key]
            verts.extend(v + off for v in by_index[local_req])
        paths.append((num, tuple(verts)))
    return PathSolution(tuple(paths))


def to_dot(composed: ComposedInstance) -> str:
    """Graphviz source with one cluster per copy, layer 1 at the top."""
    inst = composed.instance
    n = inst.graph.n // len(composed.copy_map)
    lines = [
        "digraph composed {",
        "  rankdir=TB;",
        "  node [shape=circle, fontsize=9, width=0.3];",
    ]
    for i, c in enumerate(composed.copy_map):
        owner = "root" if not c.owner else ".".join(map(str, c.owner))
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f'    label="layer {c.layer}  {owner} / {c.index}";')
        lines.append("    " + " ".join(f"v{v};" for v in range(c.offset + 1, c.offset + n + 1)))
        lines.append("  }")
    for i, r in enumerate(inst.requests, 1):
        lines.append(f'  v{r.source} [style=bold, xlabel="s{i}"];')
        lines.append(f'  v{r.sink} [style=bold, xlabel="t{i}"];')
    lines.extend(f"  v{u} -> v{v};" for u, v in inst.graph.arcs)
    lines.append("}")
    return "\n".join(lines) + "\n"
