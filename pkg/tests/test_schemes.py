import random

import pytest

from known_scheme import (
    ROOT_COLLISION_INDEX,
    ROOT_COLLISION_LEAVES,
    SHAPE as KNOWN_SHAPE,
    build_known_scheme,
)

from gapamp.errors import FormatError
from gapamp.schemes import (
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
from gapamp.trees import LeafSet, TreeShape, leaf_addresses


def random_leafset(shape: TreeShape, rng: random.Random) -> LeafSet:
    size = rng.randint(0, shape.leaf_count)
    return LeafSet.from_numbers(shape, rng.sample(range(1, shape.leaf_count + 1), size))


def test_random_scheme_deterministic():
    shape = TreeShape(2, 3)
    a = random_scheme(shape, 99)
    b = random_scheme(shape, 99)
    assert a == b
    assert serialize_scheme(a) == serialize_scheme(b)
    assert a != random_scheme(shape, 100)


def test_unary_shape_has_unique_scheme():
    shape = TreeShape(1, 3)
    assert random_scheme(shape, 0) == identity_scheme(shape)
    assert random_scheme(shape, 123) == identity_scheme(shape)


def test_root_permutation_frequencies_near_uniform():
    # 2 possible root bijections at k=2, d=1; seeded draws should split evenly
    shape = TreeShape(2, 1)
    draws = 10_000
    hits = sum(random_scheme(shape, seed).perms[()] == (1, 2) for seed in range(draws))
    assert abs(hits / draws - 0.5) <= 0.02


def test_validate_scheme_catches_corruption():
    scheme = identity_scheme(TreeShape(2, 2))
    assert validate_scheme(scheme) == []
    broken = dict(scheme.perms)
    broken[(1,)] = (1, 1)
    assert any("not a bijection" in p for p in validate_scheme(Scheme(scheme.shape, broken)))
    missing = dict(scheme.perms)
    del missing[(2,)]
    assert any("missing" in p for p in validate_scheme(Scheme(scheme.shape, missing)))


def test_scheme_apply_invert_agree():
    shape = TreeShape(3, 2)
    scheme = random_scheme(shape, 7)
    for node in shape.internal_nodes():
        for child in shape.children(node):
            for index in range(1, shape.leaves_below(child) + 1):
                leaf = scheme.invert(child, index)
                assert scheme.apply(child, leaf) == index


def test_subscheme_matches_parent():
    shape = TreeShape(2, 3)
    scheme = random_scheme(shape, 11)
    for child in (1, 2):
        sub = subscheme(scheme, child)
        assert validate_scheme(sub) == []
        for node, perm in sub.perms.items():
            assert perm == scheme.perms[(child,) + node]
    with pytest.raises(ValueError):
        subscheme(random_scheme(TreeShape(2, 1), 0), 1)


def test_scheme_codec_roundtrip():
    scheme = random_scheme(TreeShape(2, 2), 5)
    text = serialize_scheme(scheme)
    assert text.splitlines()[0] == "scheme 2 2"
    assert text.splitlines()[1].startswith("root: ")
    assert parse_scheme(text) == scheme


@pytest.mark.parametrize(
    "text,hint",
    [
        ("bogus 2 2\n", "header"),
        ("scheme 2 2\nroot 1 2 3 4\n", "expected"),
        ("scheme 2 2\n9: 1\n", "not a node"),
        ("scheme 2 2\nroot: 1 2 3\n", "expected 4 entries"),
        ("scheme 2 2\nroot: 1 2 3 3\n", "not a bijection"),
        ("scheme 2 2\nroot: 1 2 3 4\nroot: 1 2 3 4\n", "duplicate"),
        ("scheme 2 2\nroot: 1 2 3 4\n", "missing"),
    ],
)
def test_scheme_codec_errors(text, hint):
    with pytest.raises(FormatError) as exc:
        parse_scheme(text)
    assert hint in exc.value.reason


def test_collision_depth_one_full_leafset():
    shape = TreeShape(3, 1)
    members = LeafSet.from_numbers(shape, range(1, 4))
    cert = find_collision(members, random_scheme(shape, 2))
    assert cert is not None
    assert cert.node == ()
    assert cert.common_index == 1
    assert cert.witnesses == ((1,), (2,), (3,))


def test_collision_empty_leafset():
    shape = TreeShape(2, 2)
    members = LeafSet.from_numbers(shape, ())
    assert find_collision(members, random_scheme(shape, 3)) is None
    assert brute_force_collisions(members, random_scheme(shape, 3)) == []


def test_collision_same_parent_pair_always_collides():
    shape = TreeShape(2, 2)
    members = LeafSet(shape, frozenset({(1, 1), (1, 2)}))
    for seed in range(10):
        cert = find_collision(members, random_scheme(shape, seed))
        assert cert is not None
        assert cert.node == (1,)


def test_verify_certificate_accepts_and_rejects():
    shape = TreeShape(2, 3)
    rng = random.Random(17)
    checked = 0
    for seed in range(40):
        scheme = random_scheme(shape, seed)
        members = random_leafset(shape, rng)
        cert = find_collision(members, scheme)
        if cert is None:
            continue
        checked += 1
        assert verify_certificate(members, scheme, cert)
        outside = LeafSet(shape, members.members - {cert.witnesses[0]})
        assert not verify_certificate(outside, scheme, cert)
        bad_index = CollisionCertificate(cert.node, cert.common_index % shape.leaves_below(cert.node + (1,)) + 1, cert.witnesses)
        assert not verify_certificate(members, scheme, bad_index)
        swapped = CollisionCertificate(cert.node, cert.common_index, cert.witnesses[::-1])
        if cert.witnesses[0] != cert.witnesses[-1]:
            assert not verify_certificate(members, scheme, swapped)
    assert checked >= 10


def test_certificate_structural_rejections():
    shape = TreeShape(2, 2)
    scheme = identity_scheme(shape)
    members = LeafSet.from_numbers(shape, range(1, 5))
    cert = find_collision(members, scheme)
    assert verify_certificate(members, scheme, cert)
    leafy = CollisionCertificate((1, 1), 1, cert.witnesses)
    assert not verify_certificate(members, scheme, leafy)
    short = CollisionCertificate(cert.node, cert.common_index, cert.witnesses[:1])
    assert not verify_certificate(members, scheme, short)


def test_brute_force_agreement_small_shapes():
    rng = random.Random(4242)
    for round_no in range(120):
        shape = TreeShape(2, 1 + round_no % 3)
        scheme = random_scheme(shape, rng.getrandbits(32))
        members = random_leafset(shape, rng)
        all_certs = brute_force_collisions(members, scheme)
        first = find_collision(members, scheme)
        if all_certs:
            assert first == all_certs[0]
            assert all(verify_certificate(members, scheme, c) for c in all_certs)
        else:
            assert first is None


def test_brute_force_full_leafset_yields_all_indices():
    shape = TreeShape(2, 2)
    members = LeafSet.from_numbers(shape, range(1, 5))
    certs = brute_force_collisions(members, random_scheme(shape, 8))
    per_node = {}
    for c in certs:
        per_node.setdefault(c.node, []).append(c.common_index)
    for node in shape.internal_nodes():
        size = shape.leaves_below(node) // shape.k
        assert sorted(per_node[node]) == list(range(1, size + 1))


def test_brute_force_guard():
    shape = TreeShape(2, 7)
    members = LeafSet.from_numbers(shape, ())
    with pytest.raises(ValueError):
        brute_force_collisions(members, identity_scheme(shape))


def test_known_ternary_scheme_root_collision():
    scheme = build_known_scheme()
    assert validate_scheme(scheme) == []
    members = LeafSet.from_numbers(KNOWN_SHAPE, ROOT_COLLISION_LEAVES)
    cert = find_collision(members, scheme)
    assert cert is not None
    assert cert.node == ()
    assert cert.common_index == ROOT_COLLISION_INDEX
    assert tuple(KNOWN_SHAPE.leaf_number(w) for w in cert.witnesses) == ROOT_COLLISION_LEAVES
    assert verify_certificate(members, scheme, cert)


def test_find_collision_shape_mismatch():
    with pytest.raises(ValueError):
        find_collision(
            LeafSet.from_numbers(TreeShape(2, 2), [1]), random_scheme(TreeShape(2, 3), 0)
        )


def test_identity_scheme_covers_every_node():
    shape = TreeShape(2, 3)
    scheme = identity_scheme(shape)
    assert set(scheme.perms) == set(shape.nodes_breadth_first())
    assert all(scheme.perms[leaf] == (1,) for leaf in leaf_addresses(shape))
