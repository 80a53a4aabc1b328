import math
from collections import Counter
from fractions import Fraction
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from treetau.errors import CapExceeded
from treetau.trees import (
    Forest,
    LabeledTree,
    count_trees_with_degrees,
    decode_many,
    edge_adjacency_fraction,
    edge_functional,
    enumerate_trees,
    forest_containment_probability,
    mean_edge_functional,
    multiset_permutations,
    phi_seminorm,
    prufer_decode,
    prufer_encode,
    sample_tree,
    sample_tree_edges,
    tree_edge_array,
)


def star(n, c=1):
    return LabeledTree(n, tuple((c, v) for v in range(1, n + 1) if v != c))


def test_tree_validation():
    with pytest.raises(ValueError):
        LabeledTree(3, ((1, 2),))
    with pytest.raises(ValueError):
        LabeledTree(4, ((1, 2), (2, 3), (1, 3)))
    with pytest.raises(ValueError):
        LabeledTree(3, ((1, 2), (2, 4)))
    with pytest.raises(ValueError):
        Forest(4, ((1, 2), (2, 3), (3, 1)))


def test_encode_small_cases():
    assert prufer_encode(LabeledTree(2, ((1, 2),))) == ()
    for n in range(3, 9):
        for c in range(1, n + 1):
            assert prufer_encode(star(n, c)) == (c,) * (n - 2)


def test_decode_small_cases():
    assert prufer_decode((), 2) == LabeledTree(2, ((1, 2),))
    trees = {prufer_decode(code, 4) for code in product(range(1, 5), repeat=2)}
    assert len(trees) == 16
    with pytest.raises(ValueError):
        prufer_decode((5,), 3)
    with pytest.raises(ValueError):
        prufer_decode((1, 1), 3)


random_trees = st.integers(2, 30).flatmap(
    lambda n: st.lists(st.integers(1, n), min_size=n - 2, max_size=n - 2).map(lambda c: (n, tuple(c)))
)


@settings(max_examples=200, deadline=None)
@given(random_trees)
def test_round_trip_and_degree_property(nc):
    n, code = nc
    tree = prufer_decode(code, n)
    assert prufer_encode(tree) == code
    counts = Counter(code)
    assert tree.degrees() == tuple(counts[j] + 1 for j in range(1, n + 1))


@settings(max_examples=100, deadline=None)
@given(random_trees.filter(lambda nc: nc[0] >= 3))
def test_vectorised_decode_matches_scalar(nc):
    n, code = nc
    arr = decode_many(np.array([code]), n)[0]
    assert LabeledTree(n, tuple(map(tuple, arr.tolist()))) == prufer_decode(code, n)


def test_count_examples():
    assert count_trees_with_degrees((3, 1, 1, 1)) == 1
    assert count_trees_with_degrees((2, 2, 1, 1)) == 2
    from treetau.degseq import tree_degree_sequences

    assert sum(count_trees_with_degrees(x) for x in tree_degree_sequences(4)) == 16
    with pytest.raises(ValueError):
        count_trees_with_degrees((2, 2, 2, 1))


def test_multiset_permutations_lexicographic():
    perms = list(multiset_permutations([2, 1, 1, 3]))
    assert perms == sorted(set(permutations([1, 1, 2, 3])))
    assert list(multiset_permutations([])) == [()]


def test_enumerate_examples():
    paths = {t.edges for t in enumerate_trees((2, 2, 1, 1))}
    assert paths == {LabeledTree(4, ((3, 1), (1, 2), (2, 4))).edges, LabeledTree(4, ((3, 2), (2, 1), (1, 4))).edges}
    assert list(enumerate_trees((3, 1, 1, 1))) == [star(4)]
    with pytest.raises(CapExceeded):
        list(enumerate_trees((5, 3, 2, 2, 1, 1, 1, 1, 1, 1), cap=100))


def test_tree_edge_array_matches_enumeration():
    x = (3, 2, 2, 1, 1, 1)
    arr = tree_edge_array(x)
    assert {LabeledTree(6, tuple(map(tuple, t.tolist()))) for t in arr} == set(enumerate_trees(x))


def test_sample_star_is_deterministic(rng):
    for _ in range(20):
        assert sample_tree((3, 1, 1, 1), rng) == star(4)


def test_sampler_is_uniform(rng):
    x = (3, 2, 2, 1, 1, 1)
    index = {t.edges: i for i, t in enumerate(enumerate_trees(x))}
    counts = np.zeros(len(index))
    for t in sample_tree_edges(x, rng, 30_000):
        counts[index[LabeledTree(6, tuple(map(tuple, t.tolist()))).edges]] += 1
    assert chisquare(counts).pvalue > 1e-4
    scalar = Counter(sample_tree(x, rng).edges for _ in range(6000))
    assert chisquare([scalar[e] for e in index]).pvalue > 1e-4


def test_forest_examples():
    x = (2, 2, 1, 1)
    assert forest_containment_probability(x, Forest(4, ((1, 2),))) == 1
    assert forest_containment_probability(x, Forest(4, ((3, 4),))) == 0
    # forest degree exceeds x
    assert forest_containment_probability(x, Forest(4, ((3, 1), (3, 2)))) == 0
    # spanning tree: only itself
    t = next(enumerate_trees(x))
    assert forest_containment_probability(x, Forest(4, t.edges)) == Fraction(1, 2)
    assert forest_containment_probability((3, 1, 1, 1), Forest(4, ((2, 3),))) == 0


def test_saturated_component_gives_zero():
    # component {1,2} uses up both degrees, so it cannot reach the rest
    x = (1, 1, 2, 2)
    assert forest_containment_probability(x, Forest(4, ((1, 2),))) == 0


def test_edge_fraction_examples():
    assert edge_adjacency_fraction((3, 1, 1, 1), 1, 2) == 1
    assert edge_adjacency_fraction((2, 2, 1, 1), 3, 4) == 0
    assert edge_adjacency_fraction((2, 2, 1, 1), 1, 2) == 1
    with pytest.raises(ValueError):
        edge_adjacency_fraction((2, 2, 1, 1), 1, 1)


def test_edge_functional_examples():
    path = LabeledTree(4, ((3, 1), (1, 2), (2, 4)))
    assert edge_functional(path, [1] * 4) == 3
    assert edge_functional(path, [0] * 4) == 0
    s = math.sqrt(6)
    assert edge_functional(path, [1 / s, 1 / s, 2 / s, 2 / s]) == pytest.approx(5 / 6)


def test_mean_edge_functional_examples():
    for x in [(2, 2, 1, 1), (3, 2, 2, 1, 1, 1), (4, 1, 1, 1, 1)]:
        assert mean_edge_functional(x, [1] * len(x)) == len(x) - 1
    s = math.sqrt(6)
    assert mean_edge_functional((2, 2, 1, 1), [1 / s, 1 / s, 2 / s, 2 / s]) == pytest.approx(5 / 6)
    assert mean_edge_functional((2, 2, 1, 1), [1, 1, 2, 2]) == 5


def test_seminorm_examples():
    assert phi_seminorm([0.3] * 5) == 0
    assert phi_seminorm([0, 0, 1, 1]) == 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=9))
def test_seminorm_is_minimum_over_centres(vals):
    best = min(sum(abs(v - c) for v in vals) for c in vals)
    assert phi_seminorm(vals) == best
