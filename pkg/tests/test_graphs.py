import math
from collections import Counter
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from treetau.degseq import DegreeSequence
from treetau.errors import CapExceeded, DisconnectedGraph, RetryLimitExceeded
from treetau.graphs import (
    SimpleGraph,
    bareiss_determinant,
    configuration_sample,
    contains_subgraph,
    enumerate_graphs,
    enumerate_spanning_trees,
    log_tau_edges,
    sample_simple_edge_arrays,
    sample_simple_graph,
    spanning_tree_count,
    spanning_tree_count_log,
    spanning_trees_by_degree,
)
from treetau.trees import LabeledTree, enumerate_trees


def _fraction_det(matrix):
    # plain Gaussian elimination over the rationals
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 7).flatmap(lambda k: st.lists(st.lists(st.integers(-9, 9), min_size=k, max_size=k), min_size=k, max_size=k)))
def test_bareiss_matches_rational_elimination(m):
    assert bareiss_determinant(m) == _fraction_det(m)


def test_bareiss_big_integers():
    m = [[10**30 + i * j for j in range(5)] for i in range(5)]
    m[0][0] += 7
    assert bareiss_determinant(m) == _fraction_det(m)
    assert bareiss_determinant([]) == 1


def test_configuration_examples(rng):
    g = configuration_sample((1, 1), rng)
    assert g.edges == ((1, 2),)
    for _ in range(10):
        h = configuration_sample((3, 2, 2, 1), rng)
        assert h.degrees() == (3, 2, 2, 1)
    assert sample_simple_graph((3, 3, 3, 3), rng) == SimpleGraph.complete(4)
    assert sample_simple_graph((2, 2, 2), rng) == SimpleGraph.cycle(3)
    with pytest.raises(RetryLimitExceeded):
        sample_simple_graph((4, 2), rng, max_tries=50)


def test_simple_sampler_is_uniform(rng):
    d = (2, 2, 2, 2, 2, 2)
    graphs = list(enumerate_graphs(d))
    assert len(graphs) == 70
    index = {g.edges: i for i, g in enumerate(graphs)}
    counts = np.zeros(len(graphs))
    for _ in range(7000):
        counts[index[sample_simple_graph(d, rng).edges]] += 1
    assert chisquare(counts).pvalue > 1e-4
    batch = Counter(tuple(map(tuple, e.tolist())) for e in sample_simple_edge_arrays(d, rng, 7000))
    assert chisquare([batch[tuple(sorted(g))] for g in index]).pvalue > 1e-4


def test_enumerate_examples():
    assert list(enumerate_graphs((3, 3, 3, 3))) == [SimpleGraph.complete(4)]
    assert len(list(enumerate_graphs((2, 2, 2, 2)))) == 3
    assert len(list(enumerate_graphs((1, 1, 1, 1)))) == 3
    assert len(list(enumerate_graphs((2,) * 5))) == 12
    assert len(list(enumerate_graphs((3,) * 6))) == 70
    assert list(enumerate_graphs((5, 1, 1, 1))) == []
    with pytest.raises(CapExceeded):
        list(enumerate_graphs((3,) * 12))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=6).filter(lambda v: sum(v) % 2 == 0))
def test_enumeration_matches_brute_force(d):
    n = len(d)
    pairs = list(combinations(range(1, n + 1), 2))
    m = sum(d) // 2
    brute = set()
    if m <= len(pairs):
        for es in combinations(pairs, m):
            if SimpleGraph(n, es).degrees() == tuple(d):
                brute.add(es)
    got = [g.edges for g in enumerate_graphs(d)]
    assert len(got) == len(set(got))
    assert set(got) == brute


def test_tau_examples():
    assert spanning_tree_count(SimpleGraph.complete(4)) == 16
    assert spanning_tree_count(SimpleGraph.cycle(5)) == 5
    assert spanning_tree_count(SimpleGraph.petersen()) == 2000
    assert sum(1 for _ in enumerate_spanning_trees(SimpleGraph.petersen())) == 2000
    assert spanning_tree_count(SimpleGraph(1, ())) == 1
    assert spanning_tree_count(SimpleGraph(4, ((1, 2), (3, 4)))) == 0


def test_tau_log_examples(rng):
    assert spanning_tree_count_log(SimpleGraph.complete(4)) == pytest.approx(math.log(16), rel=1e-13)
    assert spanning_tree_count_log(SimpleGraph.cycle(100)) == pytest.approx(math.log(100), rel=1e-12)
    with pytest.raises(DisconnectedGraph):
        spanning_tree_count_log(SimpleGraph(4, ((1, 2), (3, 4))))
    g = sample_simple_graph(DegreeSequence.regular(64, 3), rng)
    while not g.is_connected():
        g = sample_simple_graph(DegreeSequence.regular(64, 3), rng)
    exact = spanning_tree_count(g)
    assert abs(math.expm1(spanning_tree_count_log(g) - math.log(exact))) <= 1e-9
    arr = np.array(g.edges)
    assert log_tau_edges(64, arr) == pytest.approx(math.log(exact), rel=1e-15)
    assert log_tau_edges(64, arr, exact_max_n=10) == pytest.approx(math.log(exact), rel=1e-12)
    assert log_tau_edges(4, np.array([[1, 2], [3, 4]])) == -math.inf


def test_cut_edge_and_blocks():
    # two K4 blocks joined by a bridge 4-5
    left = list(combinations(range(1, 5), 2))
    right = list(combinations(range(5, 9), 2))
    g = SimpleGraph(8, tuple(left + right + [(4, 5)]))
    assert spanning_tree_count(g) == 16 * 16
    assert spanning_tree_count(SimpleGraph(8, tuple(left + right))) == 0
    # K4 and C5 sharing vertex 4
    c5 = [(4, 5), (5, 6), (6, 7), (7, 8), (8, 4)]
    assert spanning_tree_count(SimpleGraph(8, tuple(left + c5))) == 16 * 5


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32))
def test_matrix_tree_matches_backtracking(n, seed):
    rng = np.random.default_rng(seed)
    g = SimpleGraph(n, tuple(e for e in combinations(range(1, n + 1), 2) if rng.random() < 0.6))
    trees = list(enumerate_spanning_trees(g))
    assert spanning_tree_count(g) == len(trees) == len(set(trees))
    for t in trees:
        assert LabeledTree(n, t).edges == t


def test_contains_examples():
    k4 = SimpleGraph.complete(4)
    from treetau.degseq import tree_degree_sequences as tds

    all_trees = [t for x in tds(4) for t in enumerate_trees(x)]
    assert len(all_trees) == 16 and all(contains_subgraph(k4, t) for t in all_trees)
    star = LabeledTree(4, ((1, 2), (1, 3), (1, 4)))
    assert not contains_subgraph(SimpleGraph.cycle(4), star)


def test_trees_by_degree_examples():
    k4 = spanning_trees_by_degree(SimpleGraph.complete(4))
    assert len(k4) == 10 and sum(k4.values()) == 16
    for x, c in k4.items():
        assert c == (1 if sorted(x) == [1, 1, 1, 3] else 2)
    c4 = spanning_trees_by_degree(SimpleGraph.cycle(4))
    assert sum(c4.values()) == 4
    assert all(sorted(x) == [1, 1, 2, 2] for x in c4)
    assert spanning_trees_by_degree(SimpleGraph(4, ((1, 2), (3, 4)))) == {}


def test_trees_by_degree_sums_to_tau(rng):
    for _ in range(20):
        n = int(rng.integers(3, 8))
        g = SimpleGraph(n, tuple(e for e in combinations(range(1, n + 1), 2) if rng.random() < 0.6))
        assert sum(spanning_trees_by_degree(g).values()) == spanning_tree_count(g)
