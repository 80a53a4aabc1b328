"""Falling factorials and friends, exact where possible."""

from __future__ import annotations

import math

# Above this argument size exact big-integer products get slow; switch to lgamma.
EXACT_LOG_LIMIT = 20_000


def falling_factorial(a, k: int):
    """``(a)_k = a (a-1) ... (a-k+1)`` with ``(a)_0 = 1``.

    For a nonnegative integer ``a`` and ``k > a`` the product passes through
    zero, so the result is 0 rather than negative.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1
    for i in range(k):
        out *= a - i
    return out


def log_falling_factorial(a, k: int) -> float:
    """Natural log of ``(a)_k``; ``-inf`` when the product is zero."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 0.0
    if isinstance(a, int) and a < EXACT_LOG_LIMIT:
        if a < k:
            return -math.inf
        return math.log(math.perm(a, k))
    if a - k + 1 <= 0:
        if float(a).is_integer():
            return -math.inf
        raise ValueError("log_falling_factorial needs a - k + 1 > 0 for non-integer a")
    return math.lgamma(a + 1) - math.lgamma(a - k + 1)


def log_binomial(a, k: int) -> float:
    if k < 0:
        return -math.inf
    return log_falling_factorial(a, k) - math.lgamma(k + 1)


def log_factorial(a: int) -> float:
    if a < EXACT_LOG_LIMIT:
        return math.log(math.factorial(a))
    return math.lgamma(a + 1)
