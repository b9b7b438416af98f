"""Average-case cost model for random rotation circuits at a fixed angle.

Assumes each rotation commutes with a given term with probability 1/2, so the
expected number of terms at order ``k`` after ``N`` gates obeys
``M_i(k) = M_{i-1}(k) + M_{i-1}(k-1) / 2``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def mk_recursive(N: int, k: int) -> Fraction:
    if k < 0 or k > N or N < 0:
        return Fraction(0)
    row = [Fraction(1)] + [Fraction(0)] * k
    for _ in range(N):
        for j in range(k, 0, -1):
            row[j] = row[j] + row[j - 1] / 2
    return row[k]


@lru_cache(maxsize=None)
def mk_closed(N: int, k: int) -> Fraction:
    """``2**-k * C(N, k)``."""
    if k < 0 or k > N:
        return Fraction(0)
    return Fraction(math.comb(N, k), 2**k)


def cumulative_terms(N: int, K: int) -> Fraction:
    return sum((mk_closed(N, k) for k in range(min(K, N) + 1)), Fraction(0))


def _abs_terms(N: int, theta: float) -> list[float]:
    r = abs(math.sin(theta) / 2)
    return [math.comb(N, k) * r**k for k in range(N + 1)]


def abs_series(N: int, theta: float, K: int) -> float:
    """Truncated sum of absolute coefficients, ``sum_{k<=K} |sin(theta)/2|^k C(N, k)``."""
    return math.fsum(_abs_terms(N, theta)[: max(K, -1) + 1])


def abs_total(N: int, theta: float) -> float:
    return (1 + abs(math.sin(theta) / 2)) ** N


def min_order_for_bound(N: int, theta: float, delta: float) -> int:
    """Smallest ``K`` whose dropped absolute weight is below ``delta`` of the total."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    terms = _abs_terms(N, theta)
    total = math.fsum(terms)
    for K in range(N + 1):
        if math.fsum(terms[K + 1:]) / total < delta:
            return K
    return N
