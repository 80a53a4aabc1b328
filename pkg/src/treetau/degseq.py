"""Degree sequences, their statistics, and suitable tree degree sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from treetau.combinatorics import falling_factorial
from treetau.errors import CapExceeded, DomainError

DEFAULT_ENUMERATION_CAP = 12


@dataclass(frozen=True)
class DegreeStats:
    d_bar: Fraction
    d_hat_log: float
    R: Fraction
    d_max: int
    m: int


@dataclass(frozen=True)
class DegreeSequence:
    """Positive integer degrees ``d_1..d_n`` with even sum."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(int(v) for v in self.degrees)
        object.__setattr__(self, "degrees", degrees)
        if not degrees:
            raise ValueError("degree sequence must be nonempty")
        if any(v < 1 for v in degrees):
            raise ValueError("degrees must be positive integers")
        if sum(degrees) % 2:
            raise ValueError("degree sum must be even")

    @classmethod
    def regular(cls, n: int, d: int) -> "DegreeSequence":
        return cls((d,) * n)

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __getitem__(self, idx):
        return self.degrees[idx]

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def m(self) -> int:
        return sum(self.degrees) // 2

    @property
    def total(self) -> int:
        return sum(self.degrees)

    @property
    def d_max(self) -> int:
        return max(self.degrees)

    @cached_property
    def d_bar(self) -> Fraction:
        return Fraction(self.total, self.n)

    @cached_property
    def R(self) -> Fraction:
        mean = self.d_bar
        return sum(((v - mean) ** 2 for v in self.degrees), Fraction(0)) / self.n

    @cached_property
    def log_d_hat_sum(self) -> float:
        """``n * ln(d_hat) = sum_j ln d_j``."""
        return math.fsum(math.log(v) for v in self.degrees)

    @property
    def d_hat_log(self) -> float:
        return self.log_d_hat_sum / self.n

    @property
    def excess(self) -> int:
        """``(d_bar - 2) n`` as an integer."""
        return self.total - 2 * self.n

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.degrees, dtype=np.int64)


def as_degree_sequence(d) -> DegreeSequence:
    if isinstance(d, DegreeSequence):
        return d
    return DegreeSequence(tuple(d))


def is_graphical(d) -> bool:
    """Erdős–Gallai test."""
    degrees = sorted(as_degree_sequence(d).degrees, reverse=True)
    n = len(degrees)
    if sum(degrees) % 2:
        return False
    prefix = 0
    for k in range(1, n + 1):
        prefix += degrees[k - 1]
        tail = sum(min(v, k) for v in degrees[k:])
        if prefix > k * (k - 1) + tail:
            return False
    return True


def stats(d) -> DegreeStats:
    d = as_degree_sequence(d)
    return DegreeStats(d_bar=d.d_bar, d_hat_log=d.d_hat_log, R=d.R, d_max=d.d_max, m=d.m)


def theorem_condition_holds(d) -> bool:
    """``d_max^4 <= (d_bar - 2) n``, checked in integers."""
    d = as_degree_sequence(d)
    return d.d_max**4 <= d.excess


def _require_above_two(d: DegreeSequence) -> None:
    if d.excess <= 0:
        raise DomainError(f"mean degree must exceed 2 (got {d.d_bar})")


def eta_branches(d) -> tuple[float, float, float]:
    d = as_degree_sequence(d)
    _require_above_two(d)
    n = d.n
    gap = float(d.d_bar - 2)
    dm = d.d_max
    return (
        dm**4 / (gap**2 * n),
        dm**3 * math.log(n) / (gap * n),
        dm * gap,
    )


def eta(d) -> float:
    return min(eta_branches(d))


def is_tree_degree_sequence(x: Sequence[int]) -> bool:
    return len(x) >= 2 and all(v >= 1 for v in x) and sum(x) == 2 * len(x) - 2


def is_suitable(x: Sequence[int], d) -> bool:
    d = as_degree_sequence(d)
    return (
        len(x) == d.n
        and is_tree_degree_sequence(x)
        and all(1 <= xj <= dj for xj, dj in zip(x, d.degrees))
    )


def _bounded_compositions(upper: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    # all x with 1 <= x_j <= upper_j and sum x = total, lexicographic
    n = len(upper)
    suffix_max = [0] * (n + 1)
    for j in range(n - 1, -1, -1):
        suffix_max[j] = suffix_max[j + 1] + upper[j]
    x = [0] * n

    def rec(j: int, remaining: int):
        if j == n:
            if remaining == 0:
                yield tuple(x)
            return
        rest = n - j - 1
        lo = max(1, remaining - suffix_max[j + 1])
        hi = min(upper[j], remaining - rest)
        for v in range(lo, hi + 1):
            x[j] = v
            yield from rec(j + 1, remaining - v)

    yield from rec(0, total)


def enumerate_suitable(d, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple[int, ...]]:
    """All tree degree sequences ``x`` with ``x <= d``, in lexicographic order."""
    d = as_degree_sequence(d)
    if d.n > cap:
        raise CapExceeded(f"n={d.n} exceeds enumeration cap {cap}")
    if d.n < 2:
        return iter(())
    return _bounded_compositions(d.degrees, 2 * d.n - 2)


def tree_degree_sequences(n: int) -> Iterator[tuple[int, ...]]:
    """Every tree degree sequence on ``n`` vertices, lexicographic."""
    if n < 2:
        return iter(())
    return _bounded_compositions([n - 1] * n, 2 * n - 2)


def _block_labels(d: DegreeSequence) -> np.ndarray:
    # canonical contiguous partition of {1..(d_bar-1)n} into blocks of size d_j - 1
    return np.repeat(np.arange(d.n), d.array - 1)


def _check_sampleable(d: DegreeSequence) -> None:
    if d.total - d.n < d.n - 2:
        raise DomainError("need (d_bar - 1) n >= n - 2 to draw a suitable sequence")


def sample_suitable_x(d, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw ``X`` with ``X_j = |A_j ∩ B| + 1`` for a uniform ``(n-2)``-subset ``B``."""
    d = as_degree_sequence(d)
    _check_sampleable(d)
    labels = _block_labels(d)
    chosen = rng.choice(labels.size, size=d.n - 2, replace=False)
    counts = np.bincount(labels[chosen], minlength=d.n)
    return tuple(int(v) + 1 for v in counts)


def sample_suitable_x_batch(
    d, rng: np.random.Generator, size: int, chunk: int = 10_000
) -> np.ndarray:
    """``size`` independent draws of ``X`` as an int array of shape ``(size, n)``."""
    d = as_degree_sequence(d)
    _check_sampleable(d)
    labels = _block_labels(d)
    N, r, n = labels.size, d.n - 2, d.n
    out = np.empty((size, n), dtype=np.int64)
    offsets = np.arange(chunk)[:, None] * n
    for start in range(0, size, chunk):
        rows = min(chunk, size - start)
        if r == 0:
            out[start : start + rows] = 1
            continue
        keys = rng.random((rows, N))
        chosen = np.argpartition(keys, r - 1, axis=1)[:, :r] if r < N else np.broadcast_to(np.arange(N), (rows, N))
        flat = (labels[chosen] + offsets[:rows]).ravel()
        out[start : start + rows] = np.bincount(flat, minlength=rows * n).reshape(rows, n) + 1
    return out


def joint_factorial_moment(d, i: int, j: int, s: int, t: int) -> Fraction:
    """Exact ``E[(X_i - 1)_s (X_j - 1)_t]`` for distinct vertices ``i, j`` (1-based)."""
    d = as_degree_sequence(d)
    if i == j:
        raise ValueError("i and j must differ")
    if s < 0 or t < 0:
        raise ValueError("s and t must be nonnegative")
    di, dj = d.degrees[i - 1], d.degrees[j - 1]
    N = d.total - d.n
    num = falling_factorial(di - 1, s) * falling_factorial(dj - 1, t) * falling_factorial(d.n - 2, s + t)
    if num == 0:
        return Fraction(0)
    return Fraction(num, falling_factorial(N, s + t))


def single_factorial_moment(d, i: int, s: int) -> Fraction:
    """Exact ``E[(X_i - 1)_s]``."""
    d = as_degree_sequence(d)
    N = d.total - d.n
    num = falling_factorial(d.degrees[i - 1] - 1, s) * falling_factorial(d.n - 2, s)
    if num == 0:
        return Fraction(0)
    return Fraction(num, falling_factorial(N, s))
