import itertools

import pytest

from gapamp.errors import FormatError, SubsetBudgetError
from gapamp.instances import (
    DagInstance,
    Digraph,
    Request,
    gen_no_instance,
    gen_yes_instance,
    random_instance,
)
from gapamp.solver import (
    PathSolution,
    brute_force_decide,
    decide_disjoint_paths,
    max_served,
    parse_solution,
    verify_solution,
)


def test_decide_yes_parallel_arcs():
    assert decide_disjoint_paths(gen_yes_instance(3, 0), {1, 2, 3}).feasible


def test_decide_bottleneck_pair_infeasible():
    inst = gen_no_instance(2)
    decision = decide_disjoint_paths(inst, {1, 2})
    assert not decision.feasible
    assert decision.solution is None
    assert brute_force_decide(inst, {1, 2}) is False


def test_decide_bottleneck_single_feasible():
    decision = decide_disjoint_paths(gen_no_instance(2), {1})
    assert decision.feasible
    ok, _ = verify_solution(gen_no_instance(2), decision.solution, {1})
    assert ok


def test_decide_empty_subset():
    decision = decide_disjoint_paths(gen_no_instance(2), ())
    assert decision.feasible
    assert decision.solution == PathSolution(())


def test_decide_budget_guard():
    inst = gen_yes_instance(9, 0)
    with pytest.raises(SubsetBudgetError) as exc:
        decide_disjoint_paths(inst, range(1, 10))
    assert exc.value.budget == 8
    assert decide_disjoint_paths(inst, range(1, 10), budget=9).feasible


def test_decide_rejects_bad_index():
    with pytest.raises(ValueError):
        decide_disjoint_paths(gen_yes_instance(2, 0), {3})


def test_shared_endpoints_arbitrated_by_disjointness():
    # two requests from the same source: each alone is fine, together never
    g = Digraph(3, ((1, 2), (1, 3)))
    inst = DagInstance(g, (Request(1, 2), Request(1, 3)))
    assert decide_disjoint_paths(inst, {1}).feasible
    assert decide_disjoint_paths(inst, {2}).feasible
    assert not decide_disjoint_paths(inst, {1, 2}).feasible
    assert not brute_force_decide(inst, {1, 2})


def test_degenerate_request_single_vertex():
    inst = DagInstance(Digraph(2, ((1, 2),)), (Request(1, 1), Request(2, 2)))
    decision = decide_disjoint_paths(inst, {1, 2})
    assert decision.feasible
    assert decision.solution.path_for(1) == (1,)
    assert brute_force_decide(inst, {1, 2})


@pytest.mark.parametrize("seed", range(60))
def test_oracle_equivalence_random(seed):
    inst = random_instance(n=4 + seed % 7, arc_prob=0.3, k=1 + seed % 3, seed=1000 + seed)
    subset = range(1, inst.k + 1)
    assert decide_disjoint_paths(inst, subset).feasible == brute_force_decide(inst, subset)


@pytest.mark.parametrize("seed", range(20))
def test_monotone_under_subsets_and_witness_verifies(seed):
    inst = random_instance(n=8, arc_prob=0.35, k=3, seed=2000 + seed)
    full = (1, 2, 3)
    decision = decide_disjoint_paths(inst, full)
    if decision.feasible:
        ok, problems = verify_solution(inst, decision.solution, full)
        assert ok, problems
        for size in (1, 2):
            for sub in itertools.combinations(full, size):
                assert decide_disjoint_paths(inst, sub).feasible
    for size in (1, 2):
        for sub in itertools.combinations(full, size):
            got = decide_disjoint_paths(inst, sub)
            assert got.feasible == brute_force_decide(inst, sub)
            if got.feasible:
                ok, problems = verify_solution(inst, got.solution, sub)
                assert ok, problems


def test_max_served_examples():
    count, subset, _ = max_served(gen_yes_instance(3, 0))
    assert (count, subset) == (3, frozenset({1, 2, 3}))
    count, subset, sol = max_served(gen_no_instance(3))
    assert (count, subset) == (1, frozenset({1}))
    ok, _ = verify_solution(gen_no_instance(3), sol, subset)
    assert ok
    empty = DagInstance(Digraph(1))
    assert max_served(empty) == (0, frozenset(), PathSolution(()))


def test_max_served_budget():
    with pytest.raises(SubsetBudgetError):
        max_served(gen_yes_instance(13, 0))


@pytest.mark.parametrize("seed", range(12))
def test_max_served_matches_brute_force_maximum(seed):
    inst = random_instance(n=7, arc_prob=0.4, k=3, seed=3000 + seed)
    best = 0
    for size in range(3, 0, -1):
        if any(
            brute_force_decide(inst, sub)
            for sub in itertools.combinations(range(1, 4), size)
        ):
            best = size
            break
    assert max_served(inst).count == best


def test_verify_solution_violations():
    inst = gen_yes_instance(2, 1)  # paths 1-2-3 and 4-5-6
    good = PathSolution(((1, (1, 2, 3)), (2, (4, 5, 6))))
    ok, problems = verify_solution(inst, good, {1, 2})
    assert ok and not problems

    shared = PathSolution(((1, (1, 2, 3)), (2, (4, 2, 6))))
    ok, problems = verify_solution(inst, shared, {1, 2})
    assert not ok
    assert any("already used" in p for p in problems)
    assert any("not an arc" in p for p in problems)

    skipping = PathSolution(((1, (1, 3)),))
    ok, problems = verify_solution(inst, skipping, ())
    assert not ok
    assert any("not an arc" in p for p in problems)

    wrong_end = PathSolution(((1, (1, 2)),))
    ok, problems = verify_solution(inst, wrong_end, {1, 2})
    assert not ok
    assert any("ends at" in p for p in problems)
    assert any("required request 2" in p for p in problems)

    duplicate = PathSolution(((1, (1, 2, 3)), (1, (1, 2, 3))))
    ok, problems = verify_solution(inst, duplicate, ())
    assert not ok
    assert any("more than one path" in p for p in problems)


def test_solution_text_roundtrip():
    sol = PathSolution(((2, (4, 5, 6)), (1, (1, 2, 3))))
    text = sol.serialize()
    assert text == "path 2: 4 5 6\npath 1: 1 2 3\n"
    assert parse_solution(text) == sol


def test_solution_parse_errors():
    with pytest.raises(FormatError) as exc:
        parse_solution("path one: 1 2\n")
    assert exc.value.line == 1
    with pytest.raises(FormatError):
        parse_solution("path 1:\n")
