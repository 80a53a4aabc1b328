"""Analytic estimates for expected spanning-tree counts.

Headline quantities live in natural-log space. Every ``O(.)`` term is
reported as an explicit ``error_exponent`` with implied constant 1; callers
scale it by a band constant when judging agreement.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from treetau.combinatorics import falling_factorial, log_binomial, log_factorial, log_falling_factorial
from treetau.degseq import DegreeSequence, as_degree_sequence, eta_branches, is_suitable, theorem_condition_holds
from treetau.errors import ConditionError, DomainError
from treetau.graphs import SimpleGraph
from treetau.trees import LabeledTree, tree_edge_array

DEFAULT_BAND_CONSTANT = 2.0


@dataclass
class AsymptoticEstimate:
    log_value: float
    error_exponent: float
    condition_ok: bool = True
    details: dict = field(default_factory=dict)

    @property
    def value(self) -> float | None:
        """``exp(log_value)`` when it fits in a double, else None."""
        if self.log_value > 709.0:
            return None
        return math.exp(self.log_value)

    def contains(self, truth_log: float, constant: float = DEFAULT_BAND_CONSTANT) -> bool:
        return abs(truth_log - self.log_value) <= constant * self.error_exponent

    def to_dict(self) -> dict:
        return {
            "log_value": self.log_value,
            "value": self.value,
            "error_exponent": self.error_exponent,
            "condition_ok": self.condition_ok,
            "details": self.details,
        }


def _x_tuple(d: DegreeSequence, x: Sequence[int]) -> tuple[int, ...]:
    x = tuple(int(v) for v in x)
    if not is_suitable(x, d):
        raise ValueError(f"{x} is not a suitable tree degree sequence for {d.degrees}")
    return x


def _mu_denominator(d: DegreeSequence) -> int:
    # (d_bar - 2) n + 2, the edge count of the complement degree sequence d - x
    q = d.excess + 2
    if q <= 0:
        raise DomainError("(d_bar - 2) n + 2 must be positive")
    return q


def lambda0(d) -> Fraction:
    d = as_degree_sequence(d)
    return Fraction(sum(falling_factorial(v, 2) for v in d.degrees), 2 * d.total)


def lambda_x(d, x: Sequence[int]) -> Fraction:
    d = as_degree_sequence(d)
    x = _x_tuple(d, x)
    num = sum(falling_factorial(dj - xj, 2) for dj, xj in zip(d.degrees, x))
    if x == d.degrees:
        # no spare degree at all; the denominator vanishes too
        return Fraction(0)
    return Fraction(num, 2 * _mu_denominator(d))


def mu_T(d, tree: LabeledTree) -> Fraction:
    d = as_degree_sequence(d)
    x = _x_tuple(d, tree.degrees())
    spare = [dj - xj for dj, xj in zip(d.degrees, x)]
    num = sum(spare[u - 1] * spare[v - 1] for u, v in tree.edges)
    if x == d.degrees:
        return Fraction(0)
    return Fraction(num, _mu_denominator(d))


def mu_bar(d, x: Sequence[int]) -> Fraction:
    """Mean of :func:`mu_T` over all trees with degrees ``x``, in closed form."""
    d = as_degree_sequence(d)
    x = _x_tuple(d, x)
    n = d.n
    if n < 3:
        raise ValueError("closed form needs n >= 3")
    spare = [dj - xj for dj, xj in zip(d.degrees, x)]
    a = sum((xj - 1) * s for xj, s in zip(x, spare))
    b = sum((xj - 1) * s * s for xj, s in zip(x, spare))
    if x == d.degrees:
        return Fraction(0)
    return Fraction(a * sum(spare) - b, (n - 2) * _mu_denominator(d))


def mu_bar_approx(d, x: Sequence[int]) -> Fraction:
    """Leading term ``(1/n) sum (x_j - 1)(d_j - x_j)`` of :func:`mu_bar`."""
    d = as_degree_sequence(d)
    x = _x_tuple(d, x)
    return Fraction(sum((xj - 1) * (dj - xj) for xj, dj in zip(x, d.degrees)), d.n)


def lambda0_identity_rhs(d) -> Fraction:
    """``(R + d_bar^2)^2 / (4 d_bar^2) - 1/4``; equals ``lambda0 + lambda0^2``."""
    d = as_degree_sequence(d)
    db = d.d_bar
    return (d.R + db * db) ** 2 / (4 * db * db) - Fraction(1, 4)


def f_of_x(d, x: Sequence[int], exact: bool = False):
    l0 = lambda0(d)
    lx = lambda_x(d, x)
    val = l0 + l0 * l0 - lx - lx * lx
    return val if exact else float(val)


def g_of_x(d, x: Sequence[int], exact: bool = False):
    val = f_of_x(d, x, exact=True) - mu_bar(d, x)
    return val if exact else float(val)


def g_batch(d, X: np.ndarray) -> np.ndarray:
    """Vectorised ``g`` for many suitable sequences (rows of ``X``), in floats."""
    d = as_degree_sequence(d)
    X = np.asarray(X, dtype=np.float64)
    deg = d.array.astype(np.float64)
    q = float(_mu_denominator(d))
    spare = deg - X
    lam = (spare * (spare - 1)).sum(axis=1) / (2 * q)
    a = ((X - 1) * spare).sum(axis=1)
    b = ((X - 1) * spare * spare).sum(axis=1)
    mb = (a * spare.sum(axis=1) - b) / ((d.n - 2) * q)
    return float(lambda0_identity_rhs(d)) - lam - lam * lam - mb


def _spare_weights(d: DegreeSequence, x: tuple[int, ...]) -> np.ndarray:
    return np.concatenate([[0], np.asarray(d.degrees) - np.asarray(x)]).astype(np.int64)


def mu_values(d, x: Sequence[int], cap: int = 10**6) -> np.ndarray:
    """``mu(T) * ((d_bar-2)n+2)`` for every tree of ``T_x`` as exact integers."""
    d = as_degree_sequence(d)
    x = _x_tuple(d, x)
    w = _spare_weights(d, x)
    trees = tree_edge_array(x, cap=cap)
    return (w[trees[:, :, 0]] * w[trees[:, :, 1]]).sum(axis=1)


def beta_exact(d, x: Sequence[int], cap: int = 10**6) -> float:
    """Average of ``exp(-mu(T))`` over ``T_x`` by enumeration."""
    d = as_degree_sequence(d)
    if tuple(x) == d.degrees:
        return 1.0
    q = _mu_denominator(d)
    mus = mu_values(d, x, cap=cap) / q
    return float(np.mean(np.exp(-mus)))


def _require_gap(d: DegreeSequence, floor: float = 0.0) -> float:
    gap = float(d.d_bar - 2)
    if d.excess <= 0 or gap <= floor:
        raise DomainError(f"mean degree {float(d.d_bar):.6g} must exceed 2 + {floor}")
    return gap


def beta_approx(d, x: Sequence[int]) -> AsymptoticEstimate:
    d = as_degree_sequence(d)
    gap = _require_gap(d)
    n, dm = d.n, d.d_max
    concentration_branch = min(dm**4 / (gap**2 * n), dm**3 * math.log(n) / (gap * n))
    jensen_branch = dm * gap + dm**2 / (gap * n)
    return AsymptoticEstimate(
        log_value=-float(mu_bar(d, x)),
        error_exponent=min(concentration_branch, jensen_branch),
        details={"concentration_branch": concentration_branch, "jensen_branch": jensen_branch},
    )


def estimate_simple_graph_count(g: Sequence[int], avoid: SimpleGraph | None = None) -> AsymptoticEstimate:
    """McKay-type estimate for simple graphs with degrees ``g`` sharing no edge with ``avoid``.

    Applicability (``g_max >= 1`` and ``Delta_hat < (2/3) m``) is reported in
    ``condition_ok``; the value is computed regardless.
    """
    g = [int(v) for v in g]
    if any(v < 0 for v in g) or sum(g) % 2:
        raise ValueError("g must be nonnegative with even sum")
    n = len(g)
    two_m = sum(g)
    m = two_m // 2
    if m == 0:
        raise DomainError("need at least one edge")
    avoid_edges = () if avoid is None else avoid.edges
    x_deg = [0] * n
    for u, v in avoid_edges:
        x_deg[u - 1] += 1
        x_deg[v - 1] += 1
    g_max, x_max = max(g), max(x_deg)
    delta_hat = 2 + g_max * (Fraction(3, 2) * g_max + x_max + 1)
    lam = Fraction(sum(falling_factorial(v, 2) for v in g), 4 * m)
    mu = Fraction(sum(g[u - 1] * g[v - 1] for u, v in avoid_edges), two_m)
    lead = log_factorial(two_m) - log_factorial(m) - m * math.log(2) - math.fsum(log_factorial(v) for v in g)
    applicable = g_max >= 1 and delta_hat < Fraction(2, 3) * m
    return AsymptoticEstimate(
        log_value=lead - float(lam + lam * lam + mu),
        error_exponent=float(delta_hat * delta_hat / m),
        condition_ok=applicable,
        details={"lambda": float(lam), "mu": float(mu), "delta_hat": float(delta_hat), "m": m},
    )


def containment_prefactor_log(d) -> float:
    """``ln[(dn/2)_{n-1} 2^{n-1} / (dn)_{2n-2}]``."""
    d = as_degree_sequence(d)
    n = d.n
    return (
        log_falling_factorial(d.m, n - 1)
        + (n - 1) * math.log(2)
        - log_falling_factorial(d.total, 2 * n - 2)
    )


def estimate_containment_probability(d, tree: LabeledTree) -> AsymptoticEstimate:
    """Estimate of the probability that a uniform graph with degrees ``d`` contains ``tree``.

    Mean degree exactly 2 is accepted; the band is then infinite.
    """
    d = as_degree_sequence(d)
    x = _x_tuple(d, tree.degrees())
    _mu_denominator(d)
    l0 = lambda0(d)
    lx = lambda_x(d, x)
    log_val = (
        containment_prefactor_log(d)
        + math.fsum(log_falling_factorial(dj, xj) for dj, xj in zip(d.degrees, x))
        + float(l0 + l0 * l0 - lx - lx * lx - mu_T(d, tree))
    )
    err = d.d_max**4 / (float(d.d_bar - 2) * d.n) if d.excess > 0 else math.inf
    return AsymptoticEstimate(log_value=log_val, error_exponent=err, condition_ok=theorem_condition_holds(d))


def H_d_log(d, gap_floor: float = 0.0) -> float:
    d = as_degree_sequence(d)
    gap = _require_gap(d, gap_floor)
    db = float(d.d_bar)
    n = d.n
    per_vertex = math.fsum(
        [
            (db - 1) * math.log(db - 1),
            -(db / 2) * math.log(db),
            -(db / 2 - 1) * math.log(gap),
        ]
    )
    return math.fsum(
        [
            0.5 * math.log(db - 1),
            -1.5 * math.log(gap),
            -math.log(n),
            d.log_d_hat_sum,
            n * per_vertex,
        ]
    )


def growth_rate_log(d) -> float:
    """Per-vertex exponential rate ``ln[d_hat (d-1)^{d-1} / (d^{d/2} (d-2)^{d/2-1})]``."""
    d = as_degree_sequence(d)
    gap = _require_gap(d)
    db = float(d.d_bar)
    return d.d_hat_log + (db - 1) * math.log(db - 1) - (db / 2) * math.log(db) - (db / 2 - 1) * math.log(gap)


def expected_g_closed_form(d) -> float:
    d = as_degree_sequence(d)
    _require_gap(d)
    db = d.d_bar
    R = d.R
    val = (
        (6 * db * db - 14 * db + 7) / (4 * (db - 1) ** 2)
        + R / (2 * (db - 1) ** 3)
        + (2 * db * db - 4 * db + 1) * R * R / (4 * (db - 1) ** 4 * db * db)
    )
    return float(val)


def gkw_constant(d: int) -> float:
    """Limit of ``n E tau / rate^n`` for ``d``-regular graphs.

    ``sqrt(d-1) / (d-2)^{3/2} * exp((6d^2 - 14d + 7) / (4 (d-1)^2))``.
    """
    if d < 3:
        raise DomainError("need d >= 3")
    exponent = Fraction(6 * d * d - 14 * d + 7, 4 * (d - 1) ** 2)
    return math.sqrt(d - 1) / (d - 2) ** 1.5 * math.exp(float(exponent))


def expected_g_error(d) -> float:
    """Magnitude ``d_max^3 / (d_bar n)`` of the closed form's error term."""
    d = as_degree_sequence(d)
    return d.d_max**3 / (float(d.d_bar) * d.n)


# --- exact E g(X) through multivariate hypergeometric factorial moments ---

_STIRLING2: dict[tuple[int, int], int] = {}


def _stirling2(a: int, k: int) -> int:
    if (a, k) in _STIRLING2:
        return _STIRLING2[a, k]
    if a == k:
        val = 1
    elif k == 0 or k > a:
        val = 0
    else:
        val = k * _stirling2(a - 1, k) + _stirling2(a - 1, k - 1)
    _STIRLING2[a, k] = val
    return val


def _to_falling(poly: list[int]) -> list[int]:
    # coefficients in y^a -> coefficients in (y)_k
    out = [0] * len(poly)
    for a, c in enumerate(poly):
        for k in range(a + 1):
            out[k] += c * _stirling2(a, k)
    return out


def _poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _mixed_moment(D: list[int], orders: list[int], r: int, N: int) -> Fraction:
    # E prod_i (Y_i)_{k_i} for distinct coordinates of a multivariate hypergeometric draw
    num = falling_factorial(r, sum(orders))
    for Di, k in zip(D, orders):
        num *= falling_factorial(Di, k)
    if num == 0:
        return Fraction(0)
    return Fraction(num, falling_factorial(N, sum(orders)))


def _expect_single(p: list[int], D: int, r: int, N: int) -> Fraction:
    return sum((c * _mixed_moment([D], [k], r, N) for k, c in enumerate(_to_falling(p)) if c), Fraction(0))


def _expect_pair(p: list[int], q: list[int], Dp: int, Dq: int, r: int, N: int) -> Fraction:
    fp, fq = _to_falling(p), _to_falling(q)
    total = Fraction(0)
    for a, ca in enumerate(fp):
        if not ca:
            continue
        for b, cb in enumerate(fq):
            if cb:
                total += ca * cb * _mixed_moment([Dp, Dq], [a, b], r, N)
    return total


def expected_g_exact(d) -> Fraction:
    """Exact ``E g(X)`` for the random suitable sequence ``X``.

    Independent of :func:`expected_g_closed_form`: expands ``lambda``,
    ``lambda^2`` and ``mu_bar`` into factorial moments of the shifted
    multivariate hypergeometric vector and sums them exactly.
    """
    d = as_degree_sequence(d)
    _require_gap(d)
    n = d.n
    if n < 3:
        raise ValueError("need n >= 3")
    q = _mu_denominator(d)
    r, N = n - 2, d.total - n
    classes = Counter(d.degrees)

    def u(D):  # (D - y)_2
        return [D * (D - 1), -2 * D + 1, 1]

    def v(D):  # D - y
        return [D, -1]

    def w(D):  # y (D - y)
        return [0, D, -1]

    e_lam = Fraction(0)
    e_lam_sq_diag = Fraction(0)
    for deg, cnt in classes.items():
        D = deg - 1
        e_lam += cnt * _expect_single(u(D), D, r, N)
        e_lam_sq_diag += cnt * _expect_single(_poly_mul(u(D), u(D)), D, r, N)

    e_lam_sq_off = Fraction(0)
    e_mu_num = Fraction(0)
    for dj, cj in classes.items():
        for dk, ck in classes.items():
            pairs = cj * ck if dj != dk else cj * (cj - 1)
            if not pairs:
                continue
            Dj, Dk = dj - 1, dk - 1
            e_lam_sq_off += pairs * _expect_pair(u(Dj), u(Dk), Dj, Dk, r, N)
            e_mu_num += pairs * _expect_pair(w(Dj), v(Dk), Dj, Dk, r, N)

    e_lam = e_lam / (2 * q)
    e_lam_sq = (e_lam_sq_off + e_lam_sq_diag) / (4 * q * q)
    e_mu_bar = e_mu_num / ((n - 2) * q)
    return lambda0_identity_rhs(d) - e_lam - e_lam_sq - e_mu_bar


def _check_mode(d: DegreeSequence, strict: bool) -> bool:
    ok = theorem_condition_holds(d)
    if strict and not ok:
        raise ConditionError(
            f"d_max^4 = {d.d_max ** 4} exceeds (d_bar - 2) n = {d.excess}"
        )
    return ok


def _main_error(d: DegreeSequence) -> tuple[float, dict]:
    gap = float(d.d_bar - 2)
    base = d.d_max**4 / (gap * d.n)
    branches = eta_branches(d)
    return base + min(branches), {"base_error": base, "eta": min(branches), "eta_branches": list(branches)}


def expected_tau_asymptotic(d, strict: bool = True) -> AsymptoticEstimate:
    """Leading-order estimate of ``ln E tau_d`` for the uniform random graph with degrees ``d``."""
    d = as_degree_sequence(d)
    _require_gap(d)
    ok = _check_mode(d, strict)
    h = H_d_log(d)
    corr = expected_g_closed_form(d)
    err, info = _main_error(d)
    return AsymptoticEstimate(
        log_value=h + corr,
        error_exponent=err,
        condition_ok=ok,
        details={"H_d_log": h, "exponent_correction": corr, **info},
    )


def expected_tau_for_tree_degrees(d, x: Sequence[int], strict: bool = False) -> AsymptoticEstimate:
    """Estimate of ``ln E tau_d(x)``, spanning trees restricted to degree sequence ``x``."""
    d = as_degree_sequence(d)
    _require_gap(d)
    x = _x_tuple(d, x)
    ok = _check_mode(d, strict)
    n = d.n
    lx = lambda_x(d, x)
    exponent = lambda0_identity_rhs(d) - lx - lx * lx - mu_bar_approx(d, x)
    log_val = math.fsum(
        [
            H_d_log(d),
            -log_binomial(d.total - n, n - 2),
            math.fsum(log_binomial(dj - 1, xj - 1) for dj, xj in zip(d.degrees, x)),
            float(exponent),
        ]
    )
    err, info = _main_error(d)
    return AsymptoticEstimate(log_value=log_val, error_exponent=err, condition_ok=ok, details=info)


def expected_tau_near_two(d, x_param: float | None = None, strict: bool = False) -> AsymptoticEstimate:
    """Estimate for mean degree ``2 + 2x/n`` (``n + x`` edges)."""
    d = as_degree_sequence(d)
    n = d.n
    implied = d.excess / 2
    if x_param is None:
        x_param = implied
    if not math.isclose(x_param, implied, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError(f"x={x_param} inconsistent with degrees (mean degree gives x={implied})")
    if x_param <= 0:
        raise DomainError("x must be positive")
    x = float(x_param)
    ok = d.d_max**4 / 2 <= x <= math.sqrt(n)
    if strict and not ok:
        raise ConditionError(f"need d_max^4/2 <= x <= sqrt(n); got x={x}, d_max={d.d_max}, n={n}")
    R = float(d.R)
    log_val = math.fsum(
        [
            -math.log(n),
            x * (1 - math.log(2)),
            (1.5 + x) * math.log(n / (2 * x)),
            d.log_d_hat_sum - n * math.log(2),
            (6 + R) * (2 + R) / 16,
            3 * x * x / (2 * n),
        ]
    )
    return AsymptoticEstimate(
        log_value=log_val,
        error_exponent=d.d_max**4 / x + x**3 / n**2,
        condition_ok=ok,
        details={"x": x},
    )
