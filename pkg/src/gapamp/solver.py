"""Exact decision and maximization for vertex-disjoint requests on DAGs.

decide_disjoint_paths runs a pebble search: one token per selected request,
and only the token on the topologically smallest vertex may advance along
an arc or finish at its sink.  Because every path moves forward in
topological order, a token can never re-enter territory another token has
already left, so states only need the current token positions; the brute
force oracle below exists to regression-test exactly that subtlety.

Witness text format: one line per path,

    path <request-index>: v1 v2 ... vm
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple

from .errors import FormatError, SubsetBudgetError
from .instances import DagInstance, topological_order

_DONE = 0  # sentinel position; real vertices are >= 1

DEFAULT_DECIDE_BUDGET = 8
DEFAULT_MAX_SERVED_BUDGET = 12


@dataclass(frozen=True)
class PathSolution:
    """Vertex-disjoint paths, each tagged with the request index it serves."""

    paths: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def path_for(self, index: int) -> tuple[int, ...] | None:
        for i, seq in self.paths:
            if i == index:
                return seq
        return None

    def served(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.paths)

    def serialize(self) -> str:
        lines = [f"path {i}: " + " ".join(map(str, seq)) for i, seq in self.paths]
        return "\n".join(lines) + ("\n" if lines else "")


def parse_solution(text: str) -> PathSolution:
    paths: list[tuple[int, tuple[int, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        fields = head.split()
        if not sep or len(fields) != 2 or fields[0] != "path":
            raise FormatError(lineno, "expected 'path <index>: v1 v2 ...'")
        try:
            index = int(fields[1])
            seq = tuple(int(tok) for tok in rest.split())
        except ValueError:
            raise FormatError(lineno, "indices and vertices must be integers") from None
        if not seq:
            raise FormatError(lineno, "empty vertex sequence")
        paths.append((index, seq))
    return PathSolution(tuple(paths))


class Decision(NamedTuple):
    feasible: bool
    solution: PathSolution | None


def _normalize_subset(inst: DagInstance, subset: Iterable[int]) -> tuple[int, ...]:
    idxs = sorted({int(i) for i in subset})
    for i in idxs:
        if not 1 <= i <= inst.k:
            raise ValueError(f"request index {i} out of range 1..{inst.k}")
    return tuple(idxs)


def decide_disjoint_paths(
    inst: DagInstance,
    subset: Iterable[int],
    *,
    budget: int = DEFAULT_DECIDE_BUDGET,
    witness: bool = True,
) -> Decision:
    """Can all requests in `subset` be served by vertex-disjoint paths?

    States are tuples holding, per selected request, either the token's
    current vertex or a DONE marker; a finished request's sink stays
    blocked.  Visited states are memoized, so at most (n+1)**len(subset)
    states are expanded.  Subsets larger than `budget` are refused.
    """
    idxs = _normalize_subset(inst, subset)
    if len(idxs) > budget:
        raise SubsetBudgetError(len(idxs), budget)
    if not idxs:
        return Decision(True, PathSolution(()) if witness else None)

    pos = {v: i for i, v in enumerate(topological_order(inst.graph))}
    succ = inst.graph.successors
    reqs = [inst.requests[i - 1] for i in idxs]
    sinks = tuple(r.sink for r in reqs)
    start = tuple(r.source for r in reqs)
    if len(set(start)) < len(start):
        return Decision(False, None)

    target = tuple(_DONE for _ in idxs)
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], int, int]] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if state == target:
            if not witness:
                return Decision(True, None)
            return Decision(True, _reconstruct(idxs, reqs, parent, start, state))
        j = min(
            (jj for jj in range(len(state)) if state[jj] != _DONE),
            key=lambda jj: pos[state[jj]],
        )
        v = state[j]
        blocked = set(state) | {sinks[jj] for jj in range(len(state)) if state[jj] == _DONE}
        moves = [_DONE] if v == sinks[j] else [w for w in succ[v] if w not in blocked]
        for w in moves:
            nxt = state[:j] + (w,) + state[j + 1 :]
            if nxt not in seen:
                seen.add(nxt)
                parent[nxt] = (state, j, w)
                queue.append(nxt)
    return Decision(False, None)


def _reconstruct(idxs, reqs, parent, start, state) -> PathSolution:
    moves: list[tuple[int, int]] = []
    while state != start:
        prev, j, w = parent[state]
        moves.append((j, w))
        state = prev
    paths = [[r.source] for r in reqs]
    for j, w in reversed(moves):
        if w != _DONE:
            paths[j].append(w)
    return PathSolution(tuple((idx, tuple(p)) for idx, p in zip(idxs, paths)))


def brute_force_decide(inst: DagInstance, subset: Iterable[int]) -> bool:
    """Oracle: backtrack over raw simple-path choices, one request at a time.

    No memoization and no movement discipline; intended for tiny inputs.
    """
    idxs = _normalize_subset(inst, subset)
    succ = inst.graph.successors
    reqs = [inst.requests[i - 1] for i in idxs]

    def paths_between(s: int, t: int):
        stack = [(s, [s])]
        while stack:
            cur, path = stack.pop()
            if cur == t:
                yield path
                continue
            for w in succ[cur]:
                if w not in path:
                    stack.append((w, path + [w]))

    def place(i: int, used: set[int]) -> bool:
        if i == len(reqs):
            return True
        for path in paths_between(reqs[i].source, reqs[i].sink):
            if used.isdisjoint(path):
                if place(i + 1, used | set(path)):
                    return True
        return False

    return place(0, set())


class MaxServed(NamedTuple):
    count: int
    subset: frozenset[int]
    solution: PathSolution


def max_served(inst: DagInstance, *, budget: int = DEFAULT_MAX_SERVED_BUDGET) -> MaxServed:
    """Maximum number of simultaneously servable requests, with a witness.

    Enumerates subsets by descending cardinality and returns the
    lexicographically smallest maximizer.  Refuses instances with more than
    `budget` requests.
    """
    if inst.k > budget:
        raise SubsetBudgetError(inst.k, budget)
    indices = range(1, inst.k + 1)
    for size in range(inst.k, 0, -1):
        for combo in combinations(indices, size):
            decision = decide_disjoint_paths(inst, combo, budget=budget)
            if decision.feasible:
                assert decision.solution is not None
                return MaxServed(size, frozenset(combo), decision.solution)
    return MaxServed(0, frozenset(), PathSolution(()))


def verify_solution(
    inst: DagInstance, sol: PathSolution, required: Iterable[int] = ()
) -> tuple[bool, list[str]]:
    """Check arcs, endpoints, pairwise disjointness and required coverage.

    Violations come back as data; the boolean is just `not violations`.
    """
    out: list[str] = []
    g = inst.graph
    claimed: set[int] = set()
    occupied: dict[int, int] = {}
    for index, seq in sol.paths:
        tag = f"path {index}"
        if not 1 <= index <= inst.k:
            out.append(f"{tag}: request index out of range 1..{inst.k}")
            continue
        if index in claimed:
            out.append(f"{tag}: request served by more than one path")
        claimed.add(index)
        if not seq:
            out.append(f"{tag}: empty vertex sequence")
            continue
        req = inst.requests[index - 1]
        if seq[0] != req.source:
            out.append(f"{tag}: starts at {seq[0]}, request source is {req.source}")
        if seq[-1] != req.sink:
            out.append(f"{tag}: ends at {seq[-1]}, request sink is {req.sink}")
        if len(set(seq)) != len(seq):
            out.append(f"{tag}: repeats a vertex")
        for v in seq:
            if not 1 <= v <= g.n:
                out.append(f"{tag}: vertex {v} out of range 1..{g.n}")
            elif v in occupied and occupied[v] != index:
                out.append(f"{tag}: vertex {v} already used by path {occupied[v]}")
            else:
                occupied[v] = index
        for u, v in zip(seq, seq[1:]):
            if (u, v) not in g.arc_set:
                out.append(f"{tag}: ({u}, {v}) is not an arc")
    for index in sorted({int(i) for i in required}):
        if index not in claimed:
            out.append(f"required request {index} is not served")
    return not out, out
