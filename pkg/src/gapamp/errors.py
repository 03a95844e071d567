"""Shared exception types."""

from __future__ import annotations


class CycleError(Exception):
    """A digraph expected to be acyclic contains a cycle.

    `witness` is a vertex sequence starting and ending at the same vertex,
    with every consecutive pair an arc of the graph.
    """

    def __init__(self, witness: list[int]):
        super().__init__("cycle: " + " -> ".join(map(str, witness)))
        self.witness = list(witness)


class FormatError(Exception):
    """Malformed text input; carries the offending 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class SubsetBudgetError(Exception):
    """A solver call exceeded its configured subset-size budget."""

    def __init__(self, size: int, budget: int):
        super().__init__(
            f"subset of size {size} exceeds the solver budget of {budget}; "
            f"raise the budget explicitly to search a larger state space"
        )
        self.size = size
        self.budget = budget


class GuardExceededError(Exception):
    """An exhaustive search or audit was refused because its space is too large."""
