"""Vertex-disjoint path requests on DAGs: exact solving, scheme-guided
layered self-composition, collision certificates, and Monte Carlo checks."""

from .composer import ComposedInstance, CopyRecord, compose, lift_solution, to_dot
from .density import (
    DescentResult,
    dense_cover_leaf_bound,
    dense_node_cover,
    descent_step_budget,
    greedy_descend,
    required_depth,
)
from .errors import CycleError, FormatError, GuardExceededError, SubsetBudgetError
from .instances import (
    DagInstance,
    Digraph,
    Request,
    gen_no_instance,
    gen_yes_instance,
    parse_instance,
    random_instance,
    serialize_instance,
    topological_order,
    validate_instance,
)
from .schemes import (
    CollisionCertificate,
    Scheme,
    brute_force_collisions,
    find_collision,
    identity_scheme,
    parse_scheme,
    random_scheme,
    serialize_scheme,
    subscheme,
    validate_scheme,
    verify_certificate,
)
from .search import (
    EstimateReport,
    SearchReport,
    UnionBoundReport,
    derive_seed,
    enumerate_schemes,
    estimate_no_collision_probability,
    exhaustive_universal_search,
    iter_q_subsets,
    permutation_intersection_experiment,
    sample_universal_search,
    scheme_space_size,
    union_bound_audit,
)
from .solver import (
    Decision,
    MaxServed,
    PathSolution,
    brute_force_decide,
    decide_disjoint_paths,
    max_served,
    parse_solution,
    verify_solution,
)
from .trees import (
    LeafSet,
    NodeAddress,
    TreeShape,
    leaf_addresses,
    leaf_fraction,
    parse_leafset,
    serialize_leafset,
)

__version__ = "0.1.0"
