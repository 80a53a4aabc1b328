import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treetau.degseq import (
    DegreeSequence,
    enumerate_suitable,
    eta,
    eta_branches,
    is_graphical,
    is_suitable,
    joint_factorial_moment,
    sample_suitable_x,
    sample_suitable_x_batch,
    single_factorial_moment,
    stats,
    theorem_condition_holds,
    tree_degree_sequences,
)
from treetau.errors import CapExceeded, DomainError
from treetau.experiments import half_five_one
from treetau.graphs import enumerate_graphs


def test_rejects_bad_sequences():
    with pytest.raises(ValueError):
        DegreeSequence((3, 3, 3))
    with pytest.raises(ValueError):
        DegreeSequence((2, 0, 2))
    with pytest.raises(ValueError):
        DegreeSequence(())


@pytest.mark.parametrize(
    "d, expected",
    [((3, 3, 3, 3), True), ((3, 1, 1, 1), True), ((5, 1, 1, 1), False), ((2, 2), False), ((1, 1), True)],
)
def test_graphical_examples(d, expected):
    assert is_graphical(d) is expected


even_sequences = st.lists(st.integers(1, 5), min_size=1, max_size=6).filter(lambda v: sum(v) % 2 == 0)


@settings(max_examples=150, deadline=None)
@given(even_sequences)
def test_erdos_gallai_matches_enumeration(d):
    realised = next(iter(enumerate_graphs(tuple(d))), None) is not None
    assert is_graphical(d) == realised


def test_stats_regular():
    s = stats((3, 3, 3, 3))
    assert (s.d_bar, s.R, s.d_max, s.m) == (3, 0, 3, 6)
    assert s.d_hat_log == pytest.approx(math.log(3))


def test_stats_mixed():
    s = stats((5, 5, 1, 1))
    assert s.d_bar == 3 and s.R == 4


def test_half_five_one_geometric_mean():
    s = stats(half_five_one(40))
    assert s.d_bar == 3
    assert s.d_hat_log == pytest.approx(math.log(math.sqrt(5)), rel=1e-14)


def test_theorem_condition_examples():
    assert theorem_condition_holds(DegreeSequence.regular(100, 3))
    assert not theorem_condition_holds(DegreeSequence.regular(80, 3))
    assert not theorem_condition_holds((2, 2, 2, 2))
    assert not theorem_condition_holds((3, 1, 1, 1))


def test_eta_examples():
    assert eta(DegreeSequence.regular(100, 3)) == pytest.approx(0.81)
    b = eta_branches(DegreeSequence.regular(100, 3))
    assert b == pytest.approx((0.81, 27 * math.log(100) / 100, 3.0))
    d4 = DegreeSequence.regular(10000, 4)
    # first branch divides by (d-2)^2 n = 40000
    assert eta(d4) == pytest.approx(min(256 / 40000, 64 * math.log(1e4) / 20000, 8))
    with pytest.raises(DomainError):
        eta((2, 2, 2))


def test_eta_third_branch_wins_near_two():
    n = 10**6
    d = DegreeSequence((3, 3) + (2,) * (n - 2))
    branches = eta_branches(d)
    assert eta(d) == branches[2] == pytest.approx(3 * 2 / n)


def test_enumerate_suitable_examples():
    xs = list(enumerate_suitable((3, 3, 3, 3)))
    assert len(xs) == 10
    assert set(xs) == {p for p in product(range(1, 4), repeat=4) if sorted(p) in ([1, 1, 1, 3], [1, 1, 2, 2])}
    assert list(enumerate_suitable((1, 1))) == [(1, 1)]
    brute = [x for x in product(range(1, 3), range(1, 3), range(1, 2), range(1, 2)) if sum(x) == 6]
    assert list(enumerate_suitable((2, 2, 1, 1))) == brute
    with pytest.raises(CapExceeded):
        list(enumerate_suitable(DegreeSequence.regular(14, 3)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=6).filter(lambda v: sum(v) % 2 == 0))
def test_enumerate_suitable_is_exhaustive_and_sorted(d):
    brute = [x for x in product(*(range(1, v + 1) for v in d)) if sum(x) == 2 * len(d) - 2]
    got = list(enumerate_suitable(d))
    assert got == brute
    assert all(is_suitable(x, d) for x in got)


def test_tree_degree_sequences_count():
    for n in range(2, 9):
        assert len(list(tree_degree_sequences(n))) == math.comb(2 * n - 3, n - 1)


def test_joint_moment_examples():
    d = (3, 3, 3, 3)
    assert joint_factorial_moment(d, 1, 2, 1, 1) == Fraction(1, 7)
    assert joint_factorial_moment(d, 1, 2, 0, 0) == 1
    assert joint_factorial_moment(d, 1, 2, 3, 0) == 0
    assert single_factorial_moment(d, 3, 0) == 1
    with pytest.raises(ValueError):
        joint_factorial_moment(d, 2, 2, 1, 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=3, max_size=6).filter(lambda v: sum(v) % 2 == 0 and sum(v) >= 3 * len(v) - 2))
def test_joint_moment_matches_exhaustive_subsets(d):
    # enumerate every (n-2)-subset of the (d_bar - 1) n points
    from itertools import combinations

    n = len(d)
    labels = [j for j, v in enumerate(d) for _ in range(v - 1)]
    subsets = list(combinations(range(len(labels)), n - 2))
    for s, t in [(1, 0), (1, 1), (2, 1), (2, 2)]:
        total = Fraction(0)
        for B in subsets:
            counts = [0] * n
            for p in B:
                counts[labels[p]] += 1
            total += math.perm(counts[0], s) * math.perm(counts[1], t)
        assert joint_factorial_moment(d, 1, 2, s, t) == total / len(subsets)


def test_single_moment_mean(rng):
    d = DegreeSequence((5, 4, 3, 3, 2, 2, 2, 1))
    X = sample_suitable_x_batch(d, rng, 50_000)
    for j in range(1, d.n + 1):
        expect = Fraction((d.degrees[j - 1] - 1) * (d.n - 2), (d.d_bar - 1) * d.n)
        assert single_factorial_moment(d, j, 1) == expect
        se = X[:, j - 1].std() / math.sqrt(len(X)) + 1e-12
        assert abs(X[:, j - 1].mean() - 1 - float(expect)) <= 4 * se


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=12).filter(lambda v: sum(v) % 2 == 0 and sum(v) >= 3 * len(v) - 2), st.integers(0, 2**32))
def test_sampled_sequences_are_suitable(d, seed):
    rng = np.random.default_rng(seed)
    assert is_suitable(sample_suitable_x(d, rng), d)
    for row in sample_suitable_x_batch(d, rng, 20, chunk=7):
        assert is_suitable(tuple(int(v) for v in row), d)


def test_batch_and_literal_samplers_agree(rng):
    d = DegreeSequence((4, 3, 3, 2, 2))
    lit = np.array([sample_suitable_x(d, rng) for _ in range(20000)])
    bat = sample_suitable_x_batch(d, rng, 20000)
    assert np.abs(lit.mean(axis=0) - bat.mean(axis=0)).max() < 0.03
