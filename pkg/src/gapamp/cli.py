"""gapamp command line: generation, solving, schemes, composition, estimates.

Every randomized subcommand either takes an explicit --seed or generates
one and records it in its output, so any run can be reproduced.  Exit
codes: 0 on success, 1 for domain-negative answers under --fail-on-no,
2 for usage, file and domain errors.
"""

from __future__ import annotations

import argparse
import os
from pathlib import Path

from . import search
from .composer import compose, lift_solution, to_dot
from .density import required_depth
from .errors import FormatError, GuardExceededError, SubsetBudgetError
from .instances import (
    DagInstance,
    gen_no_instance,
    gen_yes_instance,
    parse_instance,
    serialize_instance,
    validate_instance,
)
from .schemes import parse_scheme, random_scheme, serialize_scheme
from .solver import decide_disjoint_paths, max_served, parse_solution, verify_solution
from .trees import LeafSet, TreeShape, parse_leafset


def _read_text(path: str) -> str:
    return Path(path).read_text()


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


def _fresh_seed() -> int:
    return int.from_bytes(os.urandom(6), "big")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = _fresh_seed()
    print(f"seed: {seed}")
    return seed


def _parse_index_list(text: str) -> list[int]:
    toks = text.replace(",", " ").split()
    if not toks:
        raise ValueError("empty index list")
    return [int(tok) for tok in toks]


def _load_instance(path: str) -> DagInstance:
    return parse_instance(_read_text(path))


def _load_leafset(args) -> LeafSet:
    if getattr(args, "leafset", None):
        return parse_leafset(_read_text(args.leafset))
    shape = TreeShape(args.k, args.d)
    return LeafSet.from_numbers(shape, _parse_index_list(args.leaves))


def _address_label(node) -> str:
    return "root" if not node else ".".join(map(str, node))


def cmd_gen(args) -> int:
    if args.yes:
        inst = gen_yes_instance(args.k, args.pad)
    else:
        inst = gen_no_instance(args.k)
    text = serialize_instance(inst)
    if args.output:
        _write_text(args.output, text)
    else:
        print(text, end="")
    return 0


def cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    violations = validate_instance(inst)
    if not violations:
        print("VALID")
        return 0
    for v in violations:
        print(f"violation: {v}")
    return 1 if args.fail_on_no else 0


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    budget = args.budget
    if args.all:
        result = max_served(inst, budget=budget if budget is not None else max(12, 0))
        print(f"SERVED {result.count}/{inst.k}")
        if args.output:
            _write_text(args.output, result.solution.serialize())
        negative = result.count < inst.k
    else:
        subset = _parse_index_list(args.subset)
        kwargs = {} if budget is None else {"budget": budget}
        decision = decide_disjoint_paths(inst, subset, **kwargs)
        if decision.feasible:
            print("FEASIBLE")
            if args.output and decision.solution is not None:
                _write_text(args.output, decision.solution.serialize())
        else:
            print("INFEASIBLE")
        negative = not decision.feasible
    return 1 if negative and args.fail_on_no else 0


def cmd_depth(args) -> int:
    print(required_depth(args.k, args.q))
    return 0


def cmd_scheme_sample(args) -> int:
    seed = _resolve_seed(args)
    scheme = random_scheme(TreeShape(args.k, args.d), seed)
    text = serialize_scheme(scheme)
    if args.output:
        _write_text(args.output, text)
    else:
        print(text, end="")
    return 0


def cmd_scheme_check(args) -> int:
    from .schemes import find_collision

    scheme = parse_scheme(_read_text(args.scheme))
    args.k, args.d = scheme.shape.k, scheme.shape.d  # for --leaves without -k/-d
    members = _load_leafset(args)
    cert = find_collision(members, scheme)
    if cert is None:
        print("NO COLLISION")
        return 1 if args.fail_on_no else 0
    shape = scheme.shape
    leaves = ",".join(str(shape.leaf_number(w)) for w in cert.witnesses)
    print(f"COLLISION node={_address_label(cert.node)} index={cert.common_index}")
    print(f"witness-leaves: {leaves}")
    return 0


def cmd_scheme_search(args) -> int:
    shape = TreeShape(args.k, args.d)
    if args.sample:
        seed = _resolve_seed(args)
        report, scheme = search.sample_universal_search(
            shape, args.q, args.sample, seed, subset_guard=args.subset_guard
        )
    else:
        report, scheme = search.exhaustive_universal_search(
            shape, args.q, scheme_guard=args.scheme_guard, subset_guard=args.subset_guard
        )
    from .reporting import format_report

    pairs = [
        ("command", "scheme search"),
        ("k", shape.k),
        ("d", shape.d),
        ("q", args.q),
        ("outcome", report.outcome),
        ("schemes-examined", report.schemes_examined),
        ("subsets-checked", report.subsets_checked),
        ("elapsed-seconds", f"{report.elapsed_seconds:.3f}"),
    ]
    text = format_report(pairs)
    print(text, end="")
    if scheme is not None:
        scheme_text = serialize_scheme(scheme)
        if args.output:
            _write_text(args.output + ".sch", scheme_text)
        else:
            print(scheme_text, end="")
    if args.output:
        _write_text(args.output + ".report.txt", text)
    if report.outcome != "scheme found" and args.fail_on_no:
        return 1
    return 0


def cmd_compose(args) -> int:
    inst = _load_instance(args.instance)
    scheme = parse_scheme(_read_text(args.scheme))
    composed = compose(inst, scheme)
    _write_text(args.output, serialize_instance(composed.instance))
    shape = composed.shape
    map_lines = [f"leafmap {shape.k} {shape.d}"]
    map_lines.append("# columns: leaf-number address request-index")
    for leaf, idx in sorted(composed.leaf_request_map.items(), key=lambda kv: kv[1]):
        map_lines.append(f"{idx} {_address_label(leaf)} {idx}")
    map_lines.append("# copies: owner index layer offset")
    for c in composed.copy_map:
        map_lines.append(f"# copy {_address_label(c.owner)} {c.index} {c.layer} {c.offset}")
    _write_text(args.output + ".map", "\n".join(map_lines) + "\n")
    if args.dot:
        _write_text(args.dot, to_dot(composed))
    print(
        f"COMPOSED requests={shape.leaf_count} copies={len(composed.copy_map)} "
        f"vertices={composed.instance.graph.n}"
    )
    return 0


def cmd_lift(args) -> int:
    inst = _load_instance(args.instance)
    scheme = parse_scheme(_read_text(args.scheme))
    if args.solution:
        base_solution = parse_solution(_read_text(args.solution))
    else:
        decision = decide_disjoint_paths(
            inst, range(1, inst.k + 1), budget=max(8, inst.k)
        )
        if not decision.feasible:
            print("INFEASIBLE base instance: no full solution to lift")
            return 1 if args.fail_on_no else 0
        base_solution = decision.solution
    composed = compose(inst, scheme)
    lifted = lift_solution(inst, base_solution, scheme, composed)
    ok, problems = verify_solution(
        composed.instance, lifted, range(1, composed.shape.leaf_count + 1)
    )
    if not ok:
        for p in problems:
            print(f"violation: {p}")
        raise ValueError("lifted solution failed verification")
    if args.emit_instance:
        _write_text(args.emit_instance, serialize_instance(composed.instance))
    if args.output:
        _write_text(args.output, lifted.serialize())
    print(f"LIFTED {len(lifted.paths)} paths: VERIFIED")
    return 0


def _emit_estimate_outputs(args, pairs, report, outcomes, *, success_label: str) -> None:
    from .reporting import format_report, render_trial_figure, write_tsv

    pairs = list(pairs) + [
        ("trials", report.trials),
        ("successes", report.successes),
        ("estimate", f"{report.estimate:.8g}"),
        ("ci99-half-width", f"{report.ci99_half_width:.8g}"),
        ("bound", "none" if report.bound is None else f"{report.bound:.8g}"),
        (
            "consistent-with-bound",
            "n/a" if report.consistent_with_bound is None else str(report.consistent_with_bound).lower(),
        ),
        ("conclusive", str(report.conclusive).lower()),
    ]
    text = format_report(pairs)
    print(text, end="")
    if args.output:
        _write_text(args.output + ".report.txt", text)
        running = 0
        rows = []
        for i, flag in enumerate(outcomes, 1):
            running += bool(flag)
            rows.append((i, int(bool(flag)), f"{running / i:.8g}"))
        write_tsv(args.output + ".trials.tsv", ("trial", success_label, "running-estimate"), rows)
        render_trial_figure(
            args.output + ".png",
            outcomes,
            bound=report.bound,
            title=dict(pairs).get("command", ""),
            ylabel=success_label + " rate",
        )


def cmd_estimate_nocollision(args) -> int:
    seed = _resolve_seed(args)
    shape = TreeShape(args.k, args.d)
    members = _load_leafset(args)
    if members.shape != shape:
        raise ValueError(f"leaf set shape {members.shape} differs from -k/-d {shape}")
    report, outcomes = search.estimate_no_collision_probability(
        shape, members, args.trials, seed, jobs=args.jobs
    )
    pairs = [
        ("command", "estimate nocollision"),
        ("k", shape.k),
        ("d", shape.d),
        ("members", len(members)),
        ("seed", seed),
    ]
    _emit_estimate_outputs(args, pairs, report, outcomes, success_label="no-collision")
    return 0


def cmd_estimate_intersection(args) -> int:
    seed = _resolve_seed(args)
    sets = None
    if args.set:
        sets = tuple(frozenset(_parse_index_list(s)) for s in args.set)
    report, outcomes = search.permutation_intersection_experiment(
        args.universe, args.z, args.k, args.trials, seed, sets=sets, jobs=args.jobs
    )
    pairs = [
        ("command", "estimate intersection"),
        ("universe", args.universe),
        ("z", args.z),
        ("k", args.k),
        ("seed", seed),
    ]
    _emit_estimate_outputs(args, pairs, report, outcomes, success_label="empty-intersection")
    return 0


def cmd_estimate_unionbound(args) -> int:
    from .reporting import format_report, render_level_figure, write_tsv

    seed = _resolve_seed(args)
    shape = TreeShape(args.k, args.d)
    report, flags = search.union_bound_audit(shape, args.q, args.trials, seed, jobs=args.jobs)
    pairs = [
        ("command", "estimate unionbound"),
        ("k", shape.k),
        ("d", shape.d),
        ("q", args.q),
        ("seed", seed),
        ("trials", report.trials),
        ("q-subsets", report.subset_count),
        ("universal-schemes", report.universal_count),
        ("universal-fraction", f"{report.universal_fraction:.8g}"),
        ("max-no-collision-estimate", f"{report.max_no_collision_estimate:.8g}"),
        ("union-bound-lower", f"{report.union_bound_lower:.8g}"),
    ]
    text = format_report(pairs)
    print(text, end="")
    if args.output:
        _write_text(args.output + ".report.txt", text)
        write_tsv(
            args.output + ".trials.tsv",
            ("scheme", "universal"),
            [(i, int(flag)) for i, flag in enumerate(flags, 1)],
        )
        render_level_figure(
            args.output + ".png",
            report.subset_estimates,
            title="estimate unionbound",
            ylabel="no-collision estimate per q-subset",
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapamp",
        description="Vertex-disjoint path instances on DAGs: generate, solve, "
        "compose along scheme-guided layers, and estimate collision behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a yes or no instance")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--yes", action="store_true", help="k disjoint paths, fully servable")
    kind.add_argument("--no", dest="no", action="store_true", help="bottleneck, max served 1")
    p.add_argument("-k", type=int, required=True, help="request count")
    p.add_argument("--pad", type=int, default=0, help="extra path length for --yes")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="report instance invariant violations")
    p.add_argument("instance")
    p.add_argument("--fail-on-no", action="store_true", help="exit 1 when violations exist")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="decide a subset or maximize served requests")
    p.add_argument("instance")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--all", action="store_true", help="maximize over all requests")
    mode.add_argument("--subset", help="comma separated request indices to decide")
    p.add_argument("--budget", type=int, help="override the solver subset budget")
    p.add_argument("--fail-on-no", action="store_true", help="exit 1 on INFEASIBLE or partial")
    p.add_argument("-o", "--output", help="write the witness paths here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("depth", help="depth guaranteeing a universal scheme exists")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.set_defaults(func=cmd_depth)

    scheme = sub.add_parser("scheme", help="sample, check or search schemes")
    ssub = scheme.add_subparsers(dest="scheme_command", required=True)

    p = ssub.add_parser("sample", help="draw a uniform random scheme")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_scheme_sample)

    p = ssub.add_parser("check", help="find a collision for a leaf set under a scheme")
    p.add_argument("--scheme", required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--leafset", help="leaf set file")
    target.add_argument("--leaves", help="comma separated leaf numbers")
    p.add_argument("--fail-on-no", action="store_true", help="exit 1 when no collision exists")
    p.set_defaults(func=cmd_scheme_check)

    p = ssub.add_parser("search", help="search for a scheme colliding with every q-subset")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--sample", type=int, help="sample this many random schemes instead")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--scheme-guard", type=int, default=search.DEFAULT_SCHEME_GUARD)
    p.add_argument("--subset-guard", type=int, default=search.DEFAULT_SUBSET_GUARD)
    p.add_argument("--fail-on-no", action="store_true", help="exit 1 unless a scheme is found")
    p.add_argument("-o", "--output", help="output prefix for report and scheme files")
    p.set_defaults(func=cmd_scheme_search)

    p = sub.add_parser("compose", help="compose an instance along a scheme")
    p.add_argument("instance")
    p.add_argument("--scheme", required=True)
    p.add_argument("-o", "--output", required=True, help="composed instance file")
    p.add_argument("--dot", help="also write a Graphviz rendering here")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("lift", help="lift a full base solution to a composed instance")
    p.add_argument("instance")
    p.add_argument("--scheme", required=True)
    p.add_argument("--solution", help="witness file; solved from scratch when omitted")
    p.add_argument("-o", "--output", help="write the lifted witness here")
    p.add_argument("--emit-instance", help="also write the composed instance here")
    p.add_argument("--fail-on-no", action="store_true")
    p.set_defaults(func=cmd_lift)

    estimate = sub.add_parser("estimate", help="Monte Carlo estimates")
    esub = estimate.add_subparsers(dest="estimate_command", required=True)

    p = esub.add_parser("nocollision", help="P(random scheme has no collision with a leaf set)")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--leafset")
    target.add_argument("--leaves")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="output prefix for report, TSV and figure")
    p.set_defaults(func=cmd_estimate_nocollision)

    p = esub.add_parser("intersection", help="P(k permuted subsets of 1..l have empty overlap)")
    p.add_argument("-l", "--universe", type=int, required=True, help="universe size")
    p.add_argument("-z", type=int, required=True, help="each set holds at least universe/z")
    p.add_argument("-k", type=int, required=True, help="number of permuted sets")
    p.add_argument("--set", action="append", help="explicit set, repeatable, comma separated")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="output prefix for report, TSV and figure")
    p.set_defaults(func=cmd_estimate_intersection)

    p = esub.add_parser("unionbound", help="universality rate of random schemes vs q-subsets")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="output prefix for report, TSV and figure")
    p.set_defaults(func=cmd_estimate_unionbound)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}")
        return 2
    except OSError as exc:
        print(f"error: {getattr(exc, 'filename', None) or ''}: {exc.strerror or exc}")
        return 2
    except FormatError as exc:
        print(f"error: {exc}")
        return 2
    except (GuardExceededError, SubsetBudgetError, ValueError) as exc:
        print(f"error: {exc}")
        return 2


def run() -> None:
    raise SystemExit(main())
