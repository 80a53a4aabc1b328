"""Ground truth for expected spanning-tree counts: exhaustive oracles and Monte Carlo."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from treetau.asymptotics import DEFAULT_BAND_CONSTANT, expected_tau_asymptotic
from treetau.degseq import as_degree_sequence, enumerate_suitable
from treetau.graphs import (
    EXACT_MAX_N,
    SimpleGraph,
    _connected,
    enumerate_graphs,
    enumerate_spanning_trees,
    log_tau_edges,
    sample_simple_edge_arrays,
    spanning_tree_count,
)
from treetau.trees import LabeledTree, tree_edge_array


def _graphs(d, max_n: int, max_m: int) -> list[SimpleGraph]:
    graphs = list(enumerate_graphs(d, max_n=max_n, max_m=max_m))
    if not graphs:
        raise ValueError(f"{tuple(d)} is not graphical")
    return graphs


def brute_expected_tau(d, max_n: int = 10, max_m: int = 15) -> Fraction:
    """Mean of ``tau(G)`` over all simple graphs with degrees ``d`` (determinant route)."""
    graphs = _graphs(d, max_n, max_m)
    return Fraction(sum(spanning_tree_count(g) for g in graphs), len(graphs))


def brute_expected_tau_backtracking(d, max_n: int = 10, max_m: int = 15) -> Fraction:
    """Same quantity as :func:`brute_expected_tau`, counting trees by backtracking."""
    graphs = _graphs(d, max_n, max_m)
    return Fraction(sum(sum(1 for _ in enumerate_spanning_trees(g)) for g in graphs), len(graphs))


def _adjacency_stack(graphs: Sequence[SimpleGraph], n: int) -> np.ndarray:
    adj = np.zeros((len(graphs), n + 1, n + 1), dtype=bool)
    for i, g in enumerate(graphs):
        for u, v in g.edges:
            adj[i, u, v] = adj[i, v, u] = True
    return adj


def brute_expected_tau_by_x(d, max_n: int = 10, max_m: int = 15) -> dict[tuple[int, ...], Fraction]:
    """``E tau_d(x) = sum_{T in T_x} P(d, T)`` for every suitable ``x``."""
    d = as_degree_sequence(d)
    graphs = _graphs(d, max_n, max_m)
    adj = _adjacency_stack(graphs, d.n)
    out = {}
    for x in enumerate_suitable(d, cap=max_n):
        trees = tree_edge_array(x)
        # hits[g, k]: graph g contains tree k
        hits = adj[:, trees[:, :, 0], trees[:, :, 1]].all(axis=2)
        out[x] = Fraction(int(hits.sum()), len(graphs))
    return out


def brute_containment_probability(d, tree: LabeledTree, max_n: int = 10, max_m: int = 15) -> Fraction:
    graphs = _graphs(d, max_n, max_m)
    edges = set(tree.edges)
    return Fraction(sum(edges <= g.edge_set() for g in graphs), len(graphs))


@dataclass
class MonteCarloEstimate:
    mean_log: float
    std_error: float
    samples: int
    seed: int
    workers: int = 1
    connected_fraction: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(self.mean_log):
            out["mean_log"] = None
        return out


def _mc_chunk(degrees: tuple[int, ...], count: int, seq: np.random.SeedSequence, exact_max_n: int) -> np.ndarray:
    rng = np.random.default_rng(seq)
    n = len(degrees)
    graphs = sample_simple_edge_arrays(degrees, rng, count) if count else []
    return np.array([log_tau_edges(n, e, exact_max_n) for e in graphs], dtype=float)


def _shares(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (i < extra) for i in range(workers)]


def sample_log_taus(d, samples: int, seed: int, workers: int = 1, exact_max_n: int = EXACT_MAX_N) -> np.ndarray:
    """``ln tau`` of ``samples`` uniform graphs; ``-inf`` marks disconnected draws.

    Worker ``i`` draws from the ``i``-th child of ``SeedSequence(seed)`` and the
    results are concatenated in worker order, so output depends only on
    ``(seed, workers)``.
    """
    d = as_degree_sequence(d)
    workers = max(1, int(workers))
    seqs = np.random.SeedSequence(seed).spawn(workers)
    shares = _shares(samples, workers)
    if workers == 1:
        parts = [_mc_chunk(d.degrees, shares[0], seqs[0], exact_max_n)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_mc_chunk, d.degrees, k, s, exact_max_n) for k, s in zip(shares, seqs)]
            parts = [f.result() for f in futures]
    return np.concatenate(parts)


def summarize_log_taus(log_taus: np.ndarray) -> tuple[float, float]:
    """Log of the sample mean of ``tau`` and its delta-method standard error.

    The standard error is that of ``ln(mean)``: ``sd(tau) / (sqrt(N) mean(tau))``.
    Taking the log of a sample mean is biased low by roughly half its squared
    relative error.
    """
    N = log_taus.size
    finite = log_taus[np.isfinite(log_taus)]
    if finite.size == 0:
        return -math.inf, math.inf
    top = float(finite.max())
    w = np.exp(log_taus - top)
    mean_w = float(w.mean())
    sd_w = float(w.std(ddof=1)) if N > 1 else math.inf
    return top + math.log(mean_w), sd_w / (math.sqrt(N) * mean_w)


def mc_expected_tau(
    d, samples: int, seed: int, workers: int = 1, exact_max_n: int = EXACT_MAX_N
) -> MonteCarloEstimate:
    log_taus = sample_log_taus(d, samples, seed, workers, exact_max_n)
    mean_log, se = summarize_log_taus(log_taus)
    return MonteCarloEstimate(
        mean_log=mean_log,
        std_error=se,
        samples=samples,
        seed=seed,
        workers=workers,
        connected_fraction=float(np.isfinite(log_taus).mean()),
    )


def connectivity_frequency(d, samples: int, seed: int) -> float:
    d = as_degree_sequence(d)
    rng = np.random.default_rng(seed)
    graphs = sample_simple_edge_arrays(d, rng, samples)
    return sum(_connected(d.n, e.tolist()) for e in graphs) / samples


@dataclass
class ComparisonReport:
    mode: str
    truth_log: float
    formula_log: float
    band: float
    ratio_log: float
    constant: float
    verdict: bool
    condition_ok: bool
    std_error: float = 0.0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def compare(
    d,
    mode: str = "brute",
    samples: int = 500,
    seed: int = 0,
    workers: int = 1,
    constant: float = DEFAULT_BAND_CONSTANT,
) -> ComparisonReport:
    """Pit the headline estimate (permissive mode) against brute force or Monte Carlo."""
    d = as_degree_sequence(d)
    est = expected_tau_asymptotic(d, strict=False)
    notes: dict = {"constant_calibrated": True}
    se = 0.0
    if mode == "brute":
        truth = brute_expected_tau(d)
        truth_log = math.log(truth) if truth > 0 else -math.inf
        notes["truth_exact"] = str(truth)
    elif mode == "mc":
        mc = mc_expected_tau(d, samples, seed, workers)
        truth_log, se = mc.mean_log, mc.std_error
        notes["connected_fraction"] = mc.connected_fraction
        notes["samples"] = samples
        notes["seed"] = seed
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ratio = truth_log - est.log_value
    return ComparisonReport(
        mode=mode,
        truth_log=truth_log,
        formula_log=est.log_value,
        band=est.error_exponent,
        ratio_log=ratio,
        constant=constant,
        verdict=abs(ratio) <= constant * est.error_exponent,
        condition_ok=est.condition_ok,
        std_error=se,
        notes=notes,
    )


def fit_slope(ns: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``ys`` against ``ns``."""
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.polyfit(ns, ys, 1)[0])


def half_five_one(n: int) -> tuple[int, ...]:
    """``n/2`` vertices of degree 5 and ``n/2`` of degree 1 (``n`` even)."""
    if n % 2:
        raise ValueError("n must be even")
    return (5,) * (n // 2) + (1,) * (n // 2)


def run_oracle_suite(max_n: int = 7) -> list[dict]:
    """Exact cross-checks between independent code paths, small ``n`` only."""
    from itertools import product

    from treetau.asymptotics import lambda0, lambda0_identity_rhs, mu_bar, mu_values
    from treetau.degseq import DegreeSequence, tree_degree_sequences
    from treetau.trees import count_trees_with_degrees, edge_adjacency_fraction, prufer_decode, prufer_encode

    checks: list[dict] = []

    def record(name: str, passed: bool, detail: str = "") -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    top = max(2, min(max_n, 8))
    ok = True
    for n in range(2, top + 1):
        for code in product(range(1, n + 1), repeat=n - 2):
            if prufer_encode(prufer_decode(code, n)) != code:
                ok = False
    record("prufer_round_trip", ok, f"all codes, n <= {top}")

    ok = True
    for n in range(2, top + 1):
        total = 0
        for x in tree_degree_sequences(n):
            c = count_trees_with_degrees(x)
            total += c
            ok &= len(tree_edge_array(x)) == c
        ok &= total == n ** (n - 2)
    record("tree_counts_and_cayley", ok, f"n <= {top}")

    ok = True
    for n in range(3, min(top, 7) + 1):
        for x in tree_degree_sequences(n):
            trees = tree_edge_array(x)
            for j in range(1, n + 1):
                for k in range(j + 1, n + 1):
                    hits = ((trees == [j, k]).all(axis=2) | (trees == [k, j]).all(axis=2)).any(axis=1)
                    ok &= Fraction(int(hits.sum()), len(trees)) == edge_adjacency_fraction(x, j, k)
    record("edge_adjacency_fraction", ok)

    ok = True
    for n in range(4, min(top, 7) + 1):
        d = DegreeSequence((3,) * n if n % 2 == 0 else (3,) * (n - 1) + (4,))
        q = d.excess + 2
        for x in enumerate_suitable(d, cap=max_n):
            mus = mu_values(d, x)
            ok &= Fraction(int(mus.sum()), len(mus) * q) == mu_bar(d, x)
    record("mu_bar_closed_form", ok)

    rng = np.random.default_rng(0)
    ok = True
    for _ in range(200):
        degrees = [int(v) for v in rng.integers(1, 9, size=int(rng.integers(2, 12)))]
        if sum(degrees) % 2:
            degrees[0] += 1
        d = DegreeSequence(tuple(degrees))
        l0 = lambda0(d)
        ok &= l0 + l0 * l0 == lambda0_identity_rhs(d)
    record("lambda0_identity", ok, "200 random sequences")

    ok = True
    for g in (SimpleGraph.complete(4), SimpleGraph.complete(5), SimpleGraph.cycle(5), SimpleGraph.petersen()):
        ok &= spanning_tree_count(g) == sum(1 for _ in enumerate_spanning_trees(g))
    record("matrix_tree_vs_backtracking", ok, "K4, K5, C5, Petersen")

    ok = True
    for degrees in [(3, 3, 3, 3), (2, 2, 2, 2), (2, 2, 2), (2, 2, 1, 1, 1, 1), (3, 2, 2, 2, 1)]:
        if len(degrees) > max_n:
            continue
        by_x = sum(brute_expected_tau_by_x(degrees).values(), Fraction(0))
        ok &= by_x == brute_expected_tau(degrees) == brute_expected_tau_backtracking(degrees)
    record("consistency_triangle", ok)
    return checks
