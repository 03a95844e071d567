import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapamp.errors import FormatError
from gapamp.trees import (
    LeafSet,
    TreeShape,
    leaf_addresses,
    leaf_fraction,
    parse_leafset,
    serialize_leafset,
)


def test_leaf_addresses_small():
    assert leaf_addresses(TreeShape(2, 1)) == [(1,), (2,)]
    assert len(leaf_addresses(TreeShape(2, 3))) == 8


def test_leaf_numbering_ternary():
    shape = TreeShape(3, 3)
    leaves = leaf_addresses(shape)
    assert len(leaves) == 27
    assert leaves[5] == (1, 2, 3)
    assert shape.leaf_number((1, 2, 3)) == 6
    assert shape.leaf_address(6) == (1, 2, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(1, 5), st.data())
def test_leaf_number_roundtrip(k, d, data):
    shape = TreeShape(k, d)
    num = data.draw(st.integers(1, shape.leaf_count))
    assert shape.leaf_number(shape.leaf_address(num)) == num


def test_leaf_span_and_local_rank():
    shape = TreeShape(3, 3)
    assert shape.leaf_span(()) == (1, 27)
    assert shape.leaf_span((2,)) == (10, 18)
    assert shape.leaf_span((2, 3)) == (16, 18)
    assert shape.local_rank((2,), shape.leaf_address(10)) == 1
    assert shape.local_rank((2,), shape.leaf_address(18)) == 9
    with pytest.raises(ValueError):
        shape.local_rank((2,), (1, 1, 1))


def test_shape_basics():
    shape = TreeShape(3, 2)
    assert shape.leaves_below(()) == 9
    assert shape.leaves_below((1,)) == 3
    assert shape.children((1,)) == [(1, 1), (1, 2), (1, 3)]
    assert shape.children((1, 2)) == []
    assert list(shape.internal_nodes()) == [(), (1,), (2,), (3,)]
    assert list(shape.layer(1)) == [(1,), (2,), (3,)]
    with pytest.raises(ValueError):
        TreeShape(0, 1)
    with pytest.raises(ValueError):
        TreeShape(2, 0)


def test_leafset_rejects_non_leaves():
    with pytest.raises(ValueError):
        LeafSet(TreeShape(2, 2), frozenset({(1,)}))
    with pytest.raises(ValueError):
        LeafSet.from_numbers(TreeShape(2, 2), [5])


def test_leaf_fraction_extremes_and_example():
    shape = TreeShape(2, 2)
    everything = LeafSet.from_numbers(shape, range(1, 5))
    nothing = LeafSet.from_numbers(shape, ())
    for node in [(), (1,), (2, 1)]:
        assert leaf_fraction(everything, node) == 1
        assert leaf_fraction(nothing, node) == 0
    members = LeafSet(shape, frozenset({(1, 1), (2, 1), (2, 2)}))
    assert leaf_fraction(members, (2,)) == 1
    assert leaf_fraction(members, (1,)) == Fraction(1, 2)
    assert leaf_fraction(members, ()) == Fraction(3, 4)


@pytest.mark.parametrize("seed", range(15))
def test_layer_counts_partition_members(seed):
    shape = TreeShape(2, 5)
    rng = random.Random(seed)
    members = LeafSet.from_numbers(
        shape, rng.sample(range(1, shape.leaf_count + 1), rng.randint(0, shape.leaf_count))
    )
    for depth in range(shape.d + 1):
        assert sum(members.count_below(v) for v in shape.layer(depth)) == len(members)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_fraction_is_mean_of_children(data):
    shape = TreeShape(data.draw(st.integers(2, 3)), data.draw(st.integers(1, 4)))
    numbers = data.draw(st.sets(st.integers(1, shape.leaf_count)))
    members = LeafSet.from_numbers(shape, numbers)
    for depth in range(shape.d):
        for node in shape.layer(depth):
            children = shape.children(node)
            mean = sum(leaf_fraction(members, c) for c in children) / len(children)
            assert leaf_fraction(members, node) == mean


def test_leafset_numbers_cached_consistently():
    shape = TreeShape(2, 4)
    via_numbers = LeafSet.from_numbers(shape, [3, 1, 9])
    via_members = LeafSet(shape, via_numbers.members)
    assert via_numbers.numbers == (1, 3, 9)
    assert via_members.numbers == (1, 3, 9)
    assert (1, 1, 1, 1) in via_numbers
    assert (2, 2, 2, 2) not in via_numbers


def test_leafset_codec_roundtrip():
    shape = TreeShape(2, 3)
    members = LeafSet.from_numbers(shape, [8, 1, 5])
    text = serialize_leafset(members)
    assert text == "leafset 2 3\n1\n5\n8\n"
    assert parse_leafset(text) == members


@pytest.mark.parametrize(
    "text,line,hint",
    [
        ("1 2\n", 1, "before header"),
        ("leafset 2\n", 1, "header"),
        ("leafset 2 2\n9\n", 2, "out of range"),
        ("leafset 2 2\n1 1\n", 2, "duplicate"),
        ("leafset 2 2\nx\n", 2, "not a leaf number"),
        ("", 1, "missing"),
    ],
)
def test_leafset_codec_errors(text, line, hint):
    with pytest.raises(FormatError) as exc:
        parse_leafset(text)
    assert exc.value.line == line
    assert hint in exc.value.reason
