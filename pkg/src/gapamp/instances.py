"""Disjoint-path instances on acyclic digraphs.

Vertices are dense 1-based integers.  An instance couples a digraph with an
ordered request list; the position of a request in the list is its 1-based
index.  Requests may share endpoints (vertex-disjointness then limits which
of them can be served together); the bundled generators always produce
distinct terminals.

Text format (line oriented, '#' starts a comment):

    p ddp <n> <m> <k>    header: vertex, arc and request counts
    a <u> <v>            one arc per line, m lines
    r <s> <t>            one request per line, k lines, in index order

Canonical form puts the header first, arcs in sorted order and requests in
index order, with LF line endings.  Digraph stores its arcs sorted, so
serializing a parsed file reproduces the canonical bytes.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from .errors import CycleError, FormatError


class Request(NamedTuple):
    source: int
    sink: int


@dataclass(frozen=True)
class Digraph:
    """Directed graph on vertices 1..n; arcs are kept sorted, duplicates preserved."""

    n: int
    arcs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {self.n}")
        object.__setattr__(
            self, "arcs", tuple(sorted((int(u), int(v)) for u, v in self.arcs))
        )

    @cached_property
    def arc_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.arcs)

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.arcs:
            adj.setdefault(u, []).append(v)
        return {u: tuple(vs) for u, vs in adj.items()}


@dataclass(frozen=True)
class DagInstance:
    graph: Digraph
    requests: tuple[Request, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "requests", tuple(Request(int(s), int(t)) for s, t in self.requests)
        )

    @property
    def k(self) -> int:
        return len(self.requests)


def topological_order(g: Digraph) -> list[int]:
    """Topological order with ties broken by ascending vertex id.

    Raises CycleError with a vertex-sequence witness when the graph is
    cyclic, and ValueError when an arc endpoint is outside 1..n.
    """
    for u, v in g.arcs:
        if not (1 <= u <= g.n and 1 <= v <= g.n):
            raise ValueError(f"arc ({u}, {v}) endpoint out of range 1..{g.n}")
    indeg = {v: 0 for v in range(1, g.n + 1)}
    for _, v in g.arcs:
        indeg[v] += 1
    ready = [v for v, deg in indeg.items() if deg == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for w in g.successors[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(order) == g.n:
        return order

    emitted = set(order)
    remaining = [v for v in range(1, g.n + 1) if v not in emitted]
    preds: dict[int, list[int]] = {v: [] for v in remaining}
    for u, v in g.arcs:
        if u not in emitted and v not in emitted:
            preds[v].append(u)
    # Every remaining vertex keeps a remaining predecessor, so walking
    # smallest predecessors must revisit a vertex; reversing gives arc order.
    walk = [min(remaining)]
    seen = {walk[0]: 0}
    while True:
        nxt = min(preds[walk[-1]])
        if nxt in seen:
            raise CycleError(list(reversed(walk[seen[nxt] :] + [nxt])))
        seen[nxt] = len(walk)
        walk.append(nxt)


def validate_instance(inst: DagInstance) -> list[str]:
    """Collect every invariant violation; an empty list means the instance is valid."""
    out: list[str] = []
    g = inst.graph
    seen_arcs: set[tuple[int, int]] = set()
    endpoints_ok = True
    for i, (u, v) in enumerate(g.arcs, 1):
        if u == v:
            out.append(f"arc {i} ({u}, {v}): self-loop")
        if not (1 <= u <= g.n and 1 <= v <= g.n):
            out.append(f"arc {i} ({u}, {v}): endpoint out of range 1..{g.n}")
            endpoints_ok = False
        if (u, v) in seen_arcs:
            out.append(f"arc {i} ({u}, {v}): duplicate arc")
        seen_arcs.add((u, v))
    for i, r in enumerate(inst.requests, 1):
        if not 1 <= r.source <= g.n:
            out.append(f"request {i}: source {r.source} out of range 1..{g.n}")
        if not 1 <= r.sink <= g.n:
            out.append(f"request {i}: sink {r.sink} out of range 1..{g.n}")
    if endpoints_ok:
        try:
            topological_order(g)
        except CycleError as exc:
            out.append("cycle: " + " -> ".join(map(str, exc.witness)))
    return out


def gen_yes_instance(k: int, pad: int = 0) -> DagInstance:
    """k vertex-disjoint directed paths of length pad+1; request i spans path i.

    All k requests are simultaneously servable by construction.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if pad < 0:
        raise ValueError(f"pad must be nonnegative, got {pad}")
    span = pad + 2
    arcs: list[tuple[int, int]] = []
    requests: list[Request] = []
    for i in range(k):
        base = i * span
        arcs.extend((base + j, base + j + 1) for j in range(1, span))
        requests.append(Request(base + 1, base + span))
    return DagInstance(Digraph(k * span, tuple(arcs)), tuple(requests))


def gen_no_instance(k: int) -> DagInstance:
    """k sources feeding one bottleneck vertex feeding k sinks.

    Every (source i, sink i) path passes through the bottleneck, so at most
    one request can be served.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2 for a bottleneck instance, got {k}")
    b = k + 1
    arcs = [(i, b) for i in range(1, k + 1)] + [(b, b + i) for i in range(1, k + 1)]
    requests = tuple(Request(i, b + i) for i in range(1, k + 1))
    return DagInstance(Digraph(2 * k + 1, tuple(arcs)), requests)


def random_instance(n: int, arc_prob: float, k: int, seed: int) -> DagInstance:
    """Seeded random DAG with k uniform requests.

    Arcs are oriented along a hidden random vertex order, so the result is
    always acyclic.  Request endpoints are sampled independently and may
    repeat or coincide.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = random.Random(seed)
    hidden = list(range(1, n + 1))
    rng.shuffle(hidden)
    arcs = [
        (hidden[i], hidden[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < arc_prob
    ]
    requests = tuple(Request(rng.randint(1, n), rng.randint(1, n)) for _ in range(k))
    return DagInstance(Digraph(n, tuple(arcs)), requests)


def serialize_instance(inst: DagInstance) -> str:
    g = inst.graph
    lines = [f"p ddp {g.n} {len(g.arcs)} {inst.k}"]
    lines.extend(f"a {u} {v}" for u, v in g.arcs)
    lines.extend(f"r {r.source} {r.sink}" for r in inst.requests)
    return "\n".join(lines) + "\n"


def _int_field(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(lineno, f"not an integer: {token!r}") from None


def parse_instance(text: str) -> DagInstance:
    header: tuple[int, int, int] | None = None
    arcs: list[tuple[int, int]] = []
    requests: list[Request] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        last_line = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "p":
            if header is not None:
                raise FormatError(lineno, "duplicate header")
            if len(fields) != 5 or fields[1] != "ddp":
                raise FormatError(lineno, "header must be 'p ddp <n> <m> <k>'")
            n, m, kk = (_int_field(fields[i], lineno) for i in (2, 3, 4))
            if n < 0 or m < 0 or kk < 0:
                raise FormatError(lineno, "header counts must be nonnegative")
            header = (n, m, kk)
        elif tag in ("a", "r"):
            if header is None:
                raise FormatError(lineno, f"'{tag}' line before header")
            if len(fields) != 3:
                raise FormatError(lineno, f"'{tag}' line needs exactly two vertex ids")
            n = header[0]
            x, y = _int_field(fields[1], lineno), _int_field(fields[2], lineno)
            for value in (x, y):
                if not 1 <= value <= n:
                    raise FormatError(lineno, f"endpoint {value} out of range 1..{n}")
            if tag == "a":
                arcs.append((x, y))
            else:
                requests.append(Request(x, y))
        else:
            raise FormatError(lineno, f"unknown directive {tag!r}")
    if header is None:
        raise FormatError(max(last_line, 1), "missing 'p ddp' header")
    n, m, kk = header
    if len(arcs) != m:
        raise FormatError(max(last_line, 1), f"expected {m} arcs, found {len(arcs)}")
    if len(requests) != kk:
        raise FormatError(max(last_line, 1), f"expected {kk} requests, found {len(requests)}")
    return DagInstance(Digraph(n, tuple(arcs)), tuple(requests))
