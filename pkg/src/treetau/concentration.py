"""Measured concentration of edge functionals over random trees and of subset functions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from treetau.degseq import as_degree_sequence
from treetau.trees import count_trees_with_degrees, mean_edge_functional, phi_seminorm, sample_tree_edges, tree_edge_array

EXHAUSTIVE_LIMIT = 10**5


@dataclass(frozen=True)
class PhiSpec:
    values: tuple[float, ...]
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.b < self.a:
            raise ValueError("need a <= b")
        lo, hi = min(self.values), max(self.values)
        slack = 1e-12 * max(1.0, abs(self.a), abs(self.b))
        if lo < self.a - slack or hi > self.b + slack:
            raise ValueError("phi leaves [a, b]")

    @classmethod
    def from_values(cls, values: Sequence[float], a: float | None = None, b: float | None = None) -> "PhiSpec":
        vals = [float(v) for v in values]
        return cls(tuple(vals), min(vals) if a is None else a, max(vals) if b is None else b)

    @property
    def seminorm(self) -> float:
        return float(phi_seminorm(self.values))

    @property
    def n(self) -> int:
        return len(self.values)


def L_phi(phi: PhiSpec, n: int | None = None) -> float:
    """``(b-a)^3 min{(b-a) n, ||phi||_m (ln n + 2)}``."""
    n = phi.n if n is None else n
    width = phi.b - phi.a
    return width**3 * min(width * n, phi.seminorm * (math.log(n) + 2))


def lemma_phi(d, x: Sequence[int]) -> PhiSpec:
    """Weights ``(d_j - x_j) / sqrt((d-2)n + 2)`` on ``[0, d_max / sqrt((d-2)n + 2)]``.

    With these weights the edge functional equals ``mu(T)``.
    """
    d = as_degree_sequence(d)
    scale = math.sqrt(d.excess + 2)
    vals = [(dj - xj) / scale for dj, xj in zip(d.degrees, x)]
    return PhiSpec(tuple(vals), 0.0, d.d_max / scale)


@dataclass
class TailRow:
    t: float
    empirical: float
    bound: float
    violated: bool


@dataclass
class ConcentrationReport:
    empirical_mean: float
    exp_mean_log: float
    K_hat: float
    L_phi: float
    K_bound: float
    tail_table: list[TailRow]
    samples: int
    exhaustive: bool
    valid: bool = True
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def tail_csv(self) -> str:
        lines = ["t,empirical,bound,violated"]
        lines += [f"{r.t:.10g},{r.empirical:.10g},{r.bound:.10g},{str(r.violated).lower()}" for r in self.tail_table]
        return "\n".join(lines) + "\n"


def _log_mean_exp(values: np.ndarray) -> float:
    top = float(values.max())
    return top + math.log(float(np.mean(np.exp(values - top))))


def _tail_table(values: np.ndarray, center: float, scale: float, t_grid: Sequence[float] | None) -> list[TailRow]:
    dev = np.abs(values - center)
    if t_grid is None:
        top = float(dev.max())
        t_grid = np.linspace(top / 20, top, 20) if top > 0 else [1.0]
    rows = []
    for t in t_grid:
        t = float(t)
        emp = float(np.mean(dev >= t))
        bound = 2 * math.exp(-2 * t * t / scale) if scale > 0 else 0.0
        rows.append(TailRow(t=t, empirical=emp, bound=bound, violated=emp > bound))
    return rows


def tree_functional_values(x: Sequence[int], phi: Sequence[float], trees: np.ndarray) -> np.ndarray:
    w = np.concatenate([[0.0], np.asarray(phi, dtype=float)])
    return (w[trees[:, :, 0]] * w[trees[:, :, 1]]).sum(axis=1)


def tree_concentration_experiment(
    x: Sequence[int],
    phi: PhiSpec,
    xi: int = 1,
    samples: int = 10_000,
    rng: np.random.Generator | None = None,
    exhaustive: bool | None = None,
    t_grid: Sequence[float] | None = None,
) -> ConcentrationReport:
    """Measure ``K`` and the tails of ``F(T) = sum_{jk in T} phi(j) phi(k)`` for uniform ``T`` in ``T_x``.

    Exhaustive mode averages over the whole of ``T_x`` (default when it has at
    most ``EXHAUSTIVE_LIMIT`` trees); otherwise ``samples`` uniform draws are used.
    Nothing is asserted here.
    """
    if xi not in (-1, 1):
        raise ValueError("xi must be +1 or -1")
    size = count_trees_with_degrees(x)
    if exhaustive is None:
        exhaustive = size <= EXHAUSTIVE_LIMIT
    if exhaustive:
        trees = tree_edge_array(x, cap=max(size, 1))
    else:
        if rng is None:
            raise ValueError("sampling mode needs a random generator")
        trees = sample_tree_edges(x, rng, samples)
    F = tree_functional_values(x, phi.values, trees)
    mean = float(F.mean())
    center = float(mean_edge_functional(x, list(phi.values))) if len(x) >= 3 else mean
    exp_log = _log_mean_exp(xi * F)
    L = L_phi(phi, len(x))
    return ConcentrationReport(
        empirical_mean=mean,
        exp_mean_log=exp_log,
        K_hat=exp_log - xi * mean,
        L_phi=L,
        K_bound=L / 8,
        tail_table=_tail_table(F, center, L, t_grid),
        samples=int(F.size),
        exhaustive=exhaustive,
        notes={"xi": xi, "closed_form_mean": center},
    )


def subset_function_experiment(
    N: int,
    r: int,
    h: Callable[[np.ndarray], float],
    alpha: float,
    samples: int,
    rng: np.random.Generator,
    lipschitz_checks: int = 1000,
    t_grid: Sequence[float] | None = None,
    mean: float | None = None,
) -> ConcentrationReport:
    """Concentration of ``h(C)`` for a uniform ``r``-subset ``C`` of ``{1..N}``.

    ``h`` receives the subset as a sorted int array. ``alpha`` is spot-checked
    on random adjacent pairs; a violation marks the report invalid. ``mean``,
    if known exactly, centres the tail table.
    """
    if not 0 <= r <= N:
        raise ValueError("need 0 <= r <= N")
    universe = np.arange(1, N + 1)
    valid = True
    worst = 0.0
    if 0 < r < N:
        for _ in range(lipschitz_checks):
            perm = rng.permutation(universe)
            A = np.sort(perm[:r])
            B = perm[:r].copy()
            B[rng.integers(r)] = perm[r + rng.integers(N - r)]
            gap = abs(h(A) - h(np.sort(B)))
            worst = max(worst, gap)
            if gap > alpha * (1 + 1e-12) + 1e-12:
                valid = False
    vals = np.empty(samples)
    for i in range(samples):
        vals[i] = h(np.sort(rng.choice(universe, size=r, replace=False)))
    emp = float(vals.mean())
    exp_log = _log_mean_exp(vals)
    scale = min(r, N - r) * alpha * alpha
    return ConcentrationReport(
        empirical_mean=emp,
        exp_mean_log=exp_log,
        K_hat=exp_log - emp,
        L_phi=scale,
        K_bound=scale / 8,
        tail_table=_tail_table(vals, emp if mean is None else mean, scale, t_grid),
        samples=samples,
        exhaustive=False,
        valid=valid,
        notes={"alpha": alpha, "max_observed_gap": worst},
    )
