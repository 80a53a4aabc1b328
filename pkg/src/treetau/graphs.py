"""Graphs with given degrees and exact spanning-tree counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from treetau.degseq import _bounded_compositions, as_degree_sequence
from treetau.errors import CapExceeded, DisconnectedGraph, RetryLimitExceeded
from treetau.trees import LabeledTree, _DSU, tree_edge_array

DEFAULT_MAX_TRIES = 10**6
EXACT_MAX_N = 64


@dataclass(frozen=True)
class Multigraph:
    """Edge multiset on ``1..n``; a loop adds 2 to its vertex's degree."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges)))

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return tuple(deg)

    def is_simple(self) -> bool:
        return all(u != v for u, v in self.edges) and len(set(self.edges)) == len(self.edges)

    def to_simple(self) -> "SimpleGraph":
        if not self.is_simple():
            raise ValueError("multigraph has loops or repeated edges")
        return SimpleGraph(self.n, self.edges)


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)
        if len(set(edges)) != len(edges):
            raise ValueError("repeated edge in simple graph")
        for u, v in edges:
            if not (1 <= u < v <= self.n):
                raise ValueError(f"bad edge {(u, v)} for n={self.n}")

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls(n, tuple(combinations(range(1, n + 1), 2)))

    @classmethod
    def cycle(cls, n: int) -> "SimpleGraph":
        return cls(n, tuple((i, i % n + 1) for i in range(1, n + 1)))

    @classmethod
    def petersen(cls) -> "SimpleGraph":
        outer = [(i, i % 5 + 1) for i in range(1, 6)]
        spokes = [(i, i + 5) for i in range(1, 6)]
        inner = [(6 + i, 6 + (i + 2) % 5) for i in range(5)]
        return cls(10, tuple(outer + spokes + inner))

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return tuple(deg)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def is_connected(self) -> bool:
        return _connected(self.n, self.edges)

    def laplacian(self) -> list[list[int]]:
        L = [[0] * self.n for _ in range(self.n)]
        for u, v in self.edges:
            L[u - 1][u - 1] += 1
            L[v - 1][v - 1] += 1
            L[u - 1][v - 1] -= 1
            L[v - 1][u - 1] -= 1
        return L


def _connected(n: int, edges) -> bool:
    if n <= 1:
        return True
    dsu = _DSU(n)
    parts = n
    for u, v in edges:
        if dsu.union(int(u), int(v)):
            parts -= 1
    return parts == 1


def configuration_sample(d, rng: np.random.Generator) -> Multigraph:
    """Uniform perfect matching of the ``sum d`` points, projected to a multigraph."""
    d = as_degree_sequence(d)
    points = np.repeat(np.arange(1, d.n + 1), d.array)
    pairs = rng.permutation(points).reshape(-1, 2)
    return Multigraph(d.n, tuple(map(tuple, pairs.tolist())))


def sample_simple_graph(d, rng: np.random.Generator, max_tries: int = DEFAULT_MAX_TRIES) -> SimpleGraph:
    """Uniform element of the simple graphs with degrees ``d`` (rejection)."""
    d = as_degree_sequence(d)
    for _ in range(max_tries):
        g = configuration_sample(d, rng)
        if g.is_simple():
            return SimpleGraph(d.n, g.edges)
    raise RetryLimitExceeded(f"no simple configuration in {max_tries} attempts")


def sample_simple_edge_arrays(
    d, rng: np.random.Generator, count: int, max_tries: int = DEFAULT_MAX_TRIES, batch: int | None = None
) -> list[np.ndarray]:
    """``count`` uniform simple graphs as ``(m, 2)`` arrays of 1-based endpoints.

    Batched rejection sampler for Monte Carlo work; same law as
    :func:`sample_simple_graph` but consumes the random stream differently.
    """
    d = as_degree_sequence(d)
    n, m = d.n, d.m
    points = np.repeat(np.arange(1, n + 1), d.array)
    if batch is None:
        batch = max(16, min(4096, 2_000_000 // max(points.size, 1)))
    out: list[np.ndarray] = []
    misses = 0
    while len(out) < count:
        perms = rng.permuted(np.tile(points, (batch, 1)), axis=1).reshape(batch, m, 2)
        lo = perms.min(axis=2)
        hi = perms.max(axis=2)
        loops = (lo == hi).any(axis=1)
        keys = np.sort(lo * (n + 1) + hi, axis=1)
        repeats = (np.diff(keys, axis=1) == 0).any(axis=1) if m > 1 else np.zeros(batch, bool)
        ok = ~(loops | repeats)
        for row in range(batch):
            if ok[row]:
                out.append(np.stack([lo[row], hi[row]], axis=1))
                misses = 0
                if len(out) == count:
                    break
            else:
                misses += 1
                if misses >= max_tries:
                    raise RetryLimitExceeded(f"no simple configuration in {max_tries} attempts")
    return out


def enumerate_graphs(d, max_n: int = 10, max_m: int = 15) -> Iterator[SimpleGraph]:
    """Every simple graph with degree sequence ``d``, once each."""
    d = as_degree_sequence(d)
    n = d.n
    if n > max_n or d.m > max_m:
        raise CapExceeded(f"n={n}, m={d.m} exceeds caps n<={max_n}, m<={max_m}")
    rem = list(d.degrees)
    edges: list[tuple[int, int]] = []

    def rec(i: int):
        while i < n and rem[i] == 0:
            i += 1
        if i == n:
            yield SimpleGraph(n, tuple(edges))
            return
        need = rem[i]
        cands = [j for j in range(i + 1, n) if rem[j] > 0]
        if len(cands) < need:
            return
        rem[i] = 0
        for combo in combinations(cands, need):
            for j in combo:
                rem[j] -= 1
                edges.append((i + 1, j + 1))
            yield from rec(i + 1)
            for j in combo:
                rem[j] += 1
                edges.pop()
        rem[i] = need

    yield from rec(0)


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination over Python integers."""
    a = [list(map(int, row)) for row in matrix]
    k = len(a)
    if k == 0:
        return 1
    sign = 1
    prev = 1
    for i in range(k - 1):
        if a[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if a[r][i] != 0), None)
            if swap is None:
                return 0
            a[i], a[swap] = a[swap], a[i]
            sign = -sign
        ai = a[i]
        piv = ai[i]
        for r in range(i + 1, k):
            ar = a[r]
            f = ar[i]
            if f == 0:
                for c in range(i + 1, k):
                    ar[c] = ar[c] * piv // prev
            else:
                for c in range(i + 1, k):
                    ar[c] = (ar[c] * piv - f * ai[c]) // prev
            ar[i] = 0
        prev = piv
    return sign * a[k - 1][k - 1]


def spanning_tree_count(g: SimpleGraph) -> int:
    """Exact ``tau(G)`` as the reduced-Laplacian determinant."""
    if g.n == 1:
        return 1
    L = g.laplacian()
    return bareiss_determinant([row[1:] for row in L[1:]])


def _laplacian_array(n: int, edges: np.ndarray) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64) - 1
    L = np.zeros((n, n), dtype=np.int64)
    np.add.at(L, (e[:, 0], e[:, 0]), 1)
    np.add.at(L, (e[:, 1], e[:, 1]), 1)
    np.add.at(L, (e[:, 0], e[:, 1]), -1)
    np.add.at(L, (e[:, 1], e[:, 0]), -1)
    return L


def _log_det_float(L: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(L[1:, 1:].astype(float))
    if sign <= 0:
        raise DisconnectedGraph("reduced Laplacian is not positive definite")
    return float(logdet)


def spanning_tree_count_log(g: SimpleGraph) -> float:
    """``ln tau(G)`` from an LU factorisation in floating point."""
    if not g.is_connected():
        raise DisconnectedGraph("graph is disconnected")
    if g.n == 1:
        return 0.0
    return _log_det_float(_laplacian_array(g.n, np.array(g.edges)))


def log_tau_edges(n: int, edges: np.ndarray, exact_max_n: int = EXACT_MAX_N) -> float:
    """``ln tau`` for an edge array; ``-inf`` if disconnected.

    Uses the exact integer determinant up to ``exact_max_n`` vertices.
    """
    edges = np.asarray(edges)
    if not _connected(n, edges.tolist()):
        return -math.inf
    if n == 1:
        return 0.0
    L = _laplacian_array(n, edges)
    if n <= exact_max_n:
        return math.log(bareiss_determinant(L[1:, 1:].tolist()))
    return _log_det_float(L)


def enumerate_spanning_trees(g: SimpleGraph) -> Iterator[tuple[tuple[int, int], ...]]:
    """Backtracking over include/exclude decisions per edge."""
    n = g.n
    edges = list(g.edges)
    m = len(edges)
    if n == 1:
        yield ()
        return
    comp = list(range(n + 1))
    chosen: list[tuple[int, int]] = []

    def rec(i: int):
        if len(chosen) == n - 1:
            yield tuple(chosen)
            return
        if m - i < n - 1 - len(chosen):
            return
        u, v = edges[i]
        cu, cv = comp[u], comp[v]
        if cu != cv:
            saved = comp[:]
            for w in range(1, n + 1):
                if comp[w] == cu:
                    comp[w] = cv
            chosen.append((u, v))
            yield from rec(i + 1)
            chosen.pop()
            comp[:] = saved
        yield from rec(i + 1)

    yield from rec(0)


def contains_subgraph(g: SimpleGraph, tree: LabeledTree) -> bool:
    if g.n != tree.n:
        raise ValueError("graph and tree must share the vertex set")
    return set(tree.edges) <= g.edge_set()


def spanning_trees_by_degree(g: SimpleGraph, cap: int = 9) -> dict[tuple[int, ...], int]:
    """Spanning trees of ``g`` grouped by their degree sequence."""
    n = g.n
    if n > cap:
        raise CapExceeded(f"n={n} exceeds cap {cap}")
    deg = g.degrees()
    if n < 2 or min(deg) == 0:
        return {}
    adj = np.zeros((n + 1, n + 1), dtype=bool)
    for u, v in g.edges:
        adj[u, v] = adj[v, u] = True
    out: dict[tuple[int, ...], int] = {}
    for x in _bounded_compositions(deg, 2 * n - 2):
        trees = tree_edge_array(x)
        hits = int(adj[trees[:, :, 0], trees[:, :, 1]].all(axis=1).sum())
        if hits:
            out[x] = hits
    return out
