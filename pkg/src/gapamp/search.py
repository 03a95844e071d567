"""Universal-scheme search and Monte Carlo collision estimates.

All randomized operations are driven by a master seed: trial i uses the
derived seed (master << 32) + i, so per-trial work is independent of how
trials are batched and results are identical for any worker count.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

from .density import required_depth
from .errors import GuardExceededError
from .schemes import CollisionCertificate, Scheme, find_collision, random_scheme
from .trees import LeafSet, TreeShape

Z99 = 2.5758293035489004  # two-sided 99% normal quantile

DEFAULT_SCHEME_GUARD = 10**7
DEFAULT_SUBSET_GUARD = 10**7
UNION_BOUND_LEAF_GUARD = 20
CONCLUSIVE_FLOOR = 10  # successes and failures needed before a bound verdict is conclusive


def derive_seed(master: int, index: int) -> int:
    """Per-trial seed for trial `index` under `master` (counter scheme)."""
    return (master << 32) + index


def enumerate_schemes(shape: TreeShape) -> Iterator[Scheme]:
    """Canonical odometer over all schemes of a shape.

    Nodes are taken in breadth-first order, each node's permutations in
    lexicographic order, and the last node advances fastest; the first
    scheme yielded is the identity scheme.
    """
    nodes = list(shape.nodes_breadth_first())

    def fresh(i: int):
        return itertools.permutations(range(1, shape.leaves_below(nodes[i]) + 1))

    wheels = [fresh(i) for i in range(len(nodes))]
    current = [next(w) for w in wheels]
    while True:
        yield Scheme(shape, dict(zip(nodes, current)))
        i = len(nodes) - 1
        while i >= 0:
            nxt = next(wheels[i], None)
            if nxt is not None:
                current[i] = nxt
                break
            wheels[i] = fresh(i)
            current[i] = next(wheels[i])
            i -= 1
        if i < 0:
            return


def scheme_space_size(shape: TreeShape) -> int:
    return math.prod(
        math.factorial(shape.leaves_below(node)) for node in shape.nodes_breadth_first()
    )


def min_q_subset_size(shape: TreeShape, q: int) -> int:
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    return -(-shape.leaf_count // q)


def count_q_subsets(shape: TreeShape, q: int) -> int:
    lo = min_q_subset_size(shape, q)
    return sum(math.comb(shape.leaf_count, i) for i in range(lo, shape.leaf_count + 1))


def iter_q_subsets(shape: TreeShape, q: int) -> Iterator[LeafSet]:
    """Leaf sets holding at least a 1/q fraction, smallest sizes first."""
    lo = min_q_subset_size(shape, q)
    numbers = range(1, shape.leaf_count + 1)
    for size in range(lo, shape.leaf_count + 1):
        for combo in itertools.combinations(numbers, size):
            yield LeafSet.from_numbers(shape, combo)


@dataclass(frozen=True)
class SearchReport:
    shape: TreeShape
    q: int
    outcome: str  # "scheme found" | "none exists" | "sampled-only"
    schemes_examined: int
    subsets_checked: int  # collision checks performed across all schemes
    elapsed_seconds: float


def _universal_against_all(
    shape: TreeShape,
    q: int,
    scheme: Scheme,
    finder: Callable[[LeafSet, Scheme], CollisionCertificate | None],
) -> tuple[bool, int]:
    checked = 0
    for members in iter_q_subsets(shape, q):
        checked += 1
        if finder(members, scheme) is None:
            return False, checked
    return True, checked


def exhaustive_universal_search(
    shape: TreeShape,
    q: int,
    *,
    collision_finder: Callable[[LeafSet, Scheme], CollisionCertificate | None] = find_collision,
    scheme_guard: int = DEFAULT_SCHEME_GUARD,
    subset_guard: int = DEFAULT_SUBSET_GUARD,
) -> tuple[SearchReport, Scheme | None]:
    """First scheme colliding with every q-subset, or a certificate that none exists.

    Schemes come from enumerate_schemes; a scheme is discarded at its first
    q-subset with no collision, so "none exists" means every scheme was
    ruled out by an explicit witness subset.
    """
    space = scheme_space_size(shape)
    subsets = 2**shape.leaf_count
    if space > scheme_guard or subsets > subset_guard:
        raise GuardExceededError(
            f"refusing exhaustive search: {space} schemes (guard {scheme_guard}), "
            f"{subsets} leaf subsets (guard {subset_guard})"
        )
    started = time.perf_counter()
    examined = 0
    checked = 0
    for scheme in enumerate_schemes(shape):
        examined += 1
        universal, used = _universal_against_all(shape, q, scheme, collision_finder)
        checked += used
        if universal:
            report = SearchReport(
                shape, q, "scheme found", examined, checked, time.perf_counter() - started
            )
            return report, scheme
    report = SearchReport(
        shape, q, "none exists", examined, checked, time.perf_counter() - started
    )
    return report, None


def sample_universal_search(
    shape: TreeShape,
    q: int,
    trials: int,
    seed: int,
    *,
    subset_guard: int = DEFAULT_SUBSET_GUARD,
) -> tuple[SearchReport, Scheme | None]:
    """Test random schemes for universality; cannot certify nonexistence."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    subsets = 2**shape.leaf_count
    if subsets > subset_guard:
        raise GuardExceededError(
            f"refusing sampled search: {subsets} leaf subsets (guard {subset_guard})"
        )
    started = time.perf_counter()
    checked = 0
    for i in range(trials):
        scheme = random_scheme(shape, derive_seed(seed, i))
        universal, used = _universal_against_all(shape, q, scheme, find_collision)
        checked += used
        if universal:
            report = SearchReport(
                shape, q, "scheme found", i + 1, checked, time.perf_counter() - started
            )
            return report, scheme
    report = SearchReport(
        shape, q, "sampled-only", trials, checked, time.perf_counter() - started
    )
    return report, None


@dataclass(frozen=True)
class EstimateReport:
    trials: int
    successes: int
    estimate: float
    ci99_half_width: float
    bound: float | None  # comparison bound, when one applies
    consistent_with_bound: bool | None  # estimate <= bound + 3 standard errors
    conclusive: bool  # both outcome counts reached the normal-approximation floor


def _estimate_report(trials: int, successes: int, bound: float | None) -> EstimateReport:
    estimate = successes / trials
    stderr = math.sqrt(estimate * (1 - estimate) / trials)
    consistent = None if bound is None else estimate <= bound + 3 * stderr
    return EstimateReport(
        trials=trials,
        successes=successes,
        estimate=estimate,
        ci99_half_width=Z99 * stderr,
        bound=bound,
        consistent_with_bound=consistent,
        conclusive=min(successes, trials - successes) >= CONCLUSIVE_FLOOR,
    )


def _chunk_bounds(trials: int, jobs: int) -> list[tuple[int, int]]:
    jobs = max(1, min(jobs, trials))
    step = -(-trials // jobs)
    return [(lo, min(lo + step, trials)) for lo in range(0, trials, step)]


def _run_chunked(worker, args: tuple, trials: int, jobs: int) -> list:
    if jobs <= 1:
        return worker(*args, 0, trials)
    out: list = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, *args, lo, hi) for lo, hi in _chunk_bounds(trials, jobs)]
        for fut in futures:
            out.extend(fut.result())
    return out


def _no_collision_outcomes(
    shape: TreeShape, members: LeafSet, seed: int, lo: int, hi: int
) -> list[bool]:
    return [
        find_collision(members, random_scheme(shape, derive_seed(seed, i))) is None
        for i in range(lo, hi)
    ]


def estimate_no_collision_probability(
    shape: TreeShape, members: LeafSet, trials: int, seed: int, *, jobs: int = 1
) -> tuple[EstimateReport, list[bool]]:
    """Fraction of random schemes with no collision against a fixed leaf set.

    The comparison bound exp(-k**d) only applies at depths reaching
    required_depth for the tightest q the set satisfies; below that the
    report carries no bound claim.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if members.shape != shape:
        raise ValueError(f"leaf set shape {members.shape} differs from {shape}")
    outcomes = _run_chunked(_no_collision_outcomes, (shape, members, seed), trials, jobs)
    bound = None
    if len(members) > 0 and shape.k >= 2:
        tightest_q = -(-shape.leaf_count // len(members))
        if shape.d >= required_depth(shape.k, tightest_q):
            bound = math.exp(-shape.leaf_count)
    return _estimate_report(trials, sum(outcomes), bound), outcomes


def _intersection_outcomes(
    ell: int, sets: tuple[frozenset[int], ...], seed: int, lo: int, hi: int
) -> list[bool]:
    out = []
    for i in range(lo, hi):
        rng = random.Random(derive_seed(seed, i))
        common: set[int] | None = None
        empty = False
        for x_set in sets:
            perm = list(range(1, ell + 1))
            rng.shuffle(perm)
            image = {perm[x - 1] for x in x_set}
            common = image if common is None else common & image
            if not common:
                empty = True
                break
        out.append(empty)
    return out


def permutation_intersection_experiment(
    ell: int,
    z: int,
    k: int,
    trials: int,
    seed: int,
    *,
    sets: tuple[frozenset[int], ...] | None = None,
    jobs: int = 1,
) -> tuple[EstimateReport, list[bool]]:
    """Probability that k independently permuted subsets of 1..ell miss each other.

    Each trial shuffles 1..ell once per set and checks whether the images
    have an empty common intersection.  Every set must hold at least ell/z
    elements; the default sets are {1..ceil(ell/z)}.  The comparison bound
    is exp(-ell / z**k).
    """
    if min(ell, z, k) < 1:
        raise ValueError("ell, z and k must all be at least 1")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if sets is None:
        sets = tuple(frozenset(range(1, -(-ell // z) + 1)) for _ in range(k))
    else:
        sets = tuple(frozenset(int(x) for x in s) for s in sets)
    if len(sets) != k:
        raise ValueError(f"expected {k} sets, got {len(sets)}")
    universe = set(range(1, ell + 1))
    for i, x_set in enumerate(sets, 1):
        if not x_set <= universe:
            raise ValueError(f"set {i} has elements outside 1..{ell}")
        if len(x_set) * z < ell:
            raise ValueError(f"set {i} holds {len(x_set)} < ell/z = {ell}/{z} elements")
    outcomes = _run_chunked(_intersection_outcomes, (ell, sets, seed), trials, jobs)
    bound = math.exp(-ell / z**k)
    return _estimate_report(trials, sum(outcomes), bound), outcomes


@dataclass(frozen=True)
class UnionBoundReport:
    trials: int
    subset_count: int
    universal_count: int
    universal_fraction: float
    max_no_collision_estimate: float
    union_bound_lower: float  # 1 - subset_count * max estimate, reported for context
    subset_estimates: tuple[float, ...]  # per q-subset, in enumeration order


def _union_outcomes(
    shape: TreeShape, subset_numbers: tuple[tuple[int, ...], ...], seed: int, lo: int, hi: int
) -> list[tuple[bool, tuple[int, ...]]]:
    leaf_sets = [LeafSet.from_numbers(shape, nums) for nums in subset_numbers]
    out = []
    for i in range(lo, hi):
        scheme = random_scheme(shape, derive_seed(seed, i))
        misses = tuple(
            1 if find_collision(members, scheme) is None else 0 for members in leaf_sets
        )
        out.append((not any(misses), misses))
    return out


def union_bound_audit(
    shape: TreeShape, q: int, trials: int, seed: int, *, jobs: int = 1
) -> tuple[UnionBoundReport, list[bool]]:
    """Sample schemes against every q-subset at once.

    Reports the fraction of sampled schemes that are universal, together
    with 1 - (number of q-subsets) * max per-subset no-collision estimate,
    the quantity a union-bound argument would lower-bound that fraction by.
    """
    if shape.leaf_count > UNION_BOUND_LEAF_GUARD:
        raise GuardExceededError(
            f"k**d = {shape.leaf_count} exceeds the enumeration guard "
            f"({UNION_BOUND_LEAF_GUARD})"
        )
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    subset_numbers = tuple(tuple(ls.numbers) for ls in iter_q_subsets(shape, q))
    rows = _run_chunked(_union_outcomes, (shape, subset_numbers, seed), trials, jobs)
    flags = [flag for flag, _ in rows]
    miss_counts = [0] * len(subset_numbers)
    for _, misses in rows:
        for idx, miss in enumerate(misses):
            miss_counts[idx] += miss
    estimates = tuple(c / trials for c in miss_counts)
    max_estimate = max(estimates)
    report = UnionBoundReport(
        trials=trials,
        subset_count=len(subset_numbers),
        universal_count=sum(flags),
        universal_fraction=sum(flags) / trials,
        max_no_collision_estimate=max_estimate,
        union_bound_lower=1 - len(subset_numbers) * max_estimate,
        subset_estimates=estimates,
    )
    return report, flags
