"""Labelled trees with given degrees, via Prüfer codes."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from treetau.combinatorics import falling_factorial
from treetau.errors import CapExceeded

DEFAULT_TREE_CAP = 10**7


def _norm_edges(edges: Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(u, v), max(u, v)) for u, v in edges))


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n + 1))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


@dataclass(frozen=True)
class LabeledTree:
    """Tree on vertices ``1..n`` stored as a sorted edge tuple."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = _norm_edges(self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 1:
            raise ValueError("a tree needs at least one vertex")
        if len(edges) != self.n - 1:
            raise ValueError(f"a tree on {self.n} vertices has {self.n - 1} edges, got {len(edges)}")
        dsu = _DSU(self.n)
        for u, v in edges:
            if not (1 <= u < v <= self.n):
                raise ValueError(f"bad edge {(u, v)}")
            if not dsu.union(u, v):
                raise ValueError("edge set contains a cycle")

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return tuple(deg)


@dataclass(frozen=True)
class Forest:
    """Acyclic edge set on ``1..n``; isolated vertices are trivial components."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = _norm_edges(self.edges)
        object.__setattr__(self, "edges", edges)
        dsu = _DSU(self.n)
        for u, v in edges:
            if not (1 <= u < v <= self.n):
                raise ValueError(f"bad edge {(u, v)}")
            if not dsu.union(u, v):
                raise ValueError("forest edges contain a cycle")

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return tuple(deg)

    def components(self) -> list[list[int]]:
        dsu = _DSU(self.n)
        for u, v in self.edges:
            dsu.union(u, v)
        groups: dict[int, list[int]] = {}
        for v in range(1, self.n + 1):
            groups.setdefault(dsu.find(v), []).append(v)
        return sorted(groups.values())


def prufer_encode(tree: LabeledTree) -> tuple[int, ...]:
    """Repeatedly strip the lowest-labelled leaf, recording its neighbour."""
    n = tree.n
    if n < 2:
        raise ValueError("Prüfer codes need n >= 2")
    adj: list[set[int]] = [set() for _ in range(n + 1)]
    for u, v in tree.edges:
        adj[u].add(v)
        adj[v].add(u)
    leaves = [v for v in range(1, n + 1) if len(adj[v]) == 1]
    heapq.heapify(leaves)
    code = []
    for _ in range(n - 2):
        leaf = heapq.heappop(leaves)
        (nb,) = adj[leaf]
        code.append(nb)
        adj[nb].discard(leaf)
        adj[leaf].clear()
        if len(adj[nb]) == 1:
            heapq.heappush(leaves, nb)
    return tuple(code)


def prufer_decode(code: Sequence[int], n: int | None = None) -> LabeledTree:
    n = len(code) + 2 if n is None else n
    if len(code) != n - 2:
        raise ValueError(f"code length {len(code)} does not match n={n}")
    if any(not (1 <= b <= n) for b in code):
        raise ValueError("code entries must lie in 1..n")
    deg = [1] * (n + 1)
    for b in code:
        deg[b] += 1
    leaves = [v for v in range(1, n + 1) if deg[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for b in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, b))
        deg[b] -= 1
        if deg[b] == 1:
            heapq.heappush(leaves, b)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return LabeledTree(n, tuple(edges))


def decode_many(codes: np.ndarray, n: int) -> np.ndarray:
    """Vectorised decode of a ``(M, n-2)`` array of codes.

    Returns a ``(M, n-1, 2)`` array of 1-based endpoints. Edge order follows
    the decoding, not sorted order.
    """
    codes = np.asarray(codes, dtype=np.int64).reshape(-1, n - 2) - 1
    M = codes.shape[0]
    rows = np.arange(M)
    deg = np.ones((M, n), dtype=np.int64)
    for i in range(n - 2):
        np.add.at(deg, (rows, codes[:, i]), 1)
    edges = np.empty((M, n - 1, 2), dtype=np.int64)
    for i in range(n - 2):
        leaf = np.argmax(deg == 1, axis=1)
        b = codes[:, i]
        edges[:, i, 0] = leaf
        edges[:, i, 1] = b
        deg[rows, leaf] = 0
        deg[rows, b] -= 1
    last = np.nonzero(deg == 1)[1].reshape(M, 2)
    edges[:, n - 2] = last
    return edges + 1


def count_trees_with_degrees(x: Sequence[int]) -> int:
    """``|T_x| = (n-2)! / prod (x_j - 1)!``."""
    n = len(x)
    if n < 2 or sum(x) != 2 * n - 2 or any(v < 1 for v in x):
        raise ValueError(f"{tuple(x)} is not a tree degree sequence")
    out = math.factorial(n - 2)
    for v in x:
        out //= math.factorial(v - 1)
    return out


def code_multiset(x: Sequence[int]) -> list[int]:
    """Sorted code alphabet: vertex ``j`` repeated ``x_j - 1`` times."""
    return [j for j, v in enumerate(x, start=1) for _ in range(v - 1)]


def multiset_permutations(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct permutations of ``items`` in lexicographic order."""
    a = sorted(items)
    k = len(a)
    while True:
        yield tuple(a)
        i = k - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = k - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1 :] = reversed(a[i + 1 :])


def _check_cap(x: Sequence[int], cap: int) -> int:
    size = count_trees_with_degrees(x)
    if size > cap:
        raise CapExceeded(f"|T_x| = {size} exceeds cap {cap}")
    return size


def enumerate_trees(x: Sequence[int], cap: int = DEFAULT_TREE_CAP) -> Iterator[LabeledTree]:
    _check_cap(x, cap)
    n = len(x)
    for code in multiset_permutations(code_multiset(x)):
        yield prufer_decode(code, n)


def tree_edge_array(x: Sequence[int], cap: int = DEFAULT_TREE_CAP) -> np.ndarray:
    """Every tree of ``T_x`` as a ``(|T_x|, n-1, 2)`` array of 1-based endpoints."""
    _check_cap(x, cap)
    n = len(x)
    if n == 2:
        return np.array([[[1, 2]]], dtype=np.int64)
    codes = np.array(list(multiset_permutations(code_multiset(x))), dtype=np.int64)
    return decode_many(codes, n)


def sample_tree(x: Sequence[int], rng: np.random.Generator) -> LabeledTree:
    """Uniform element of ``T_x``: shuffle the code multiset, then decode."""
    count_trees_with_degrees(x)
    code = rng.permutation(np.asarray(code_multiset(x), dtype=np.int64))
    return prufer_decode(code.tolist(), len(x))


def sample_tree_edges(x: Sequence[int], rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` uniform trees from ``T_x`` as an edge array (see :func:`decode_many`)."""
    count_trees_with_degrees(x)
    n = len(x)
    if n == 2:
        return np.tile(np.array([[[1, 2]]], dtype=np.int64), (size, 1, 1))
    base = np.tile(np.asarray(code_multiset(x), dtype=np.int64), (size, 1))
    return decode_many(rng.permuted(base, axis=1), n)


def forest_containment_probability(x: Sequence[int], forest: Forest) -> Fraction:
    """Probability that a uniform tree of ``T_x`` contains every edge of ``forest``.

    Returns 0 when some forest degree exceeds ``x``. A spanning tree
    (one component) is contained only by itself, giving ``1/|T_x|`` or 0.
    """
    n = len(x)
    if forest.n != n:
        raise ValueError("forest and degree sequence disagree on n")
    s = forest.degrees()
    if any(sj > xj for sj, xj in zip(s, x)):
        return Fraction(0)
    comps = forest.components()
    r = len(comps)
    if r == 1:
        if s == tuple(x):
            return Fraction(1, count_trees_with_degrees(x))
        return Fraction(0)
    num = Fraction(1)
    for comp in comps:
        num *= sum(x[j - 1] - s[j - 1] for j in comp)
    if num == 0:
        return Fraction(0)
    for xj, sj in zip(x, s):
        num *= falling_factorial(xj - 1, sj - 1) if sj > 0 else Fraction(1, xj)
    return num / falling_factorial(n - 2, n - r)


def edge_adjacency_fraction(x: Sequence[int], j: int, k: int) -> Fraction:
    n = len(x)
    if j == k or n < 3:
        raise ValueError("need distinct j, k and n >= 3")
    return Fraction(x[j - 1] + x[k - 1] - 2, n - 2)


def edge_functional(tree: LabeledTree, phi: Sequence):
    return sum(phi[u - 1] * phi[v - 1] for u, v in tree.edges)


def mean_edge_functional(x: Sequence[int], phi: Sequence):
    """Average of :func:`edge_functional` over ``T_x``, in closed form.

    Exact when ``phi`` holds Fractions or ints.
    """
    n = len(x)
    if n < 3:
        raise ValueError("closed form needs n >= 3")
    total = sum(phi)
    weighted = sum((xj - 1) * p for xj, p in zip(x, phi))
    weighted_sq = sum((xj - 1) * p * p for xj, p in zip(x, phi))
    num = total * weighted - weighted_sq
    if _all_exact(phi):
        return Fraction(num) / (n - 2)
    return num / (n - 2)


def _all_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def phi_seminorm(phi: Sequence):
    """``min_c sum_j |phi(j) - c|``, attained at the lower median."""
    vals = sorted(phi)
    c = vals[(len(vals) - 1) // 2]
    return sum(abs(v - c) for v in vals)
