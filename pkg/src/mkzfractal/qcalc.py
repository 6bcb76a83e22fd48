"""Floating-point q-calculus primitives: bracket numbers, q-factorials, q-binomials.

All functions take the deformation parameter q in (0, 1].  The q = 1 branch is
evaluated exactly (no 0/0 limit) and every product is accumulated in a fixed
order so results are bit-reproducible.
"""

from __future__ import annotations

import math


def check_q(q: float) -> float:
    """Validate a deformation parameter, requiring 0 < q <= 1."""
    q = float(q)
    if not (0.0 < q <= 1.0) or math.isnan(q):
        raise ValueError(f"q must lie in (0, 1], got {q!r}")
    return q


def q_integer(k: int, q: float) -> float:
    """Bracket number [k]_q = 1 + q + ... + q^(k-1), i.e. (1-q^k)/(1-q); equals k at q = 1."""
    q = check_q(q)
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if q == 1.0:
        return float(k)
    return (1.0 - q**k) / (1.0 - q)


def q_factorial(k: int, q: float) -> float:
    """Product [k]_q [k-1]_q ... [1]_q, with the empty product equal to 1."""
    q = check_q(q)
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    out = 1.0
    for j in range(1, k + 1):
        out *= q_integer(j, q)
    return out


def q_binomial(n: int, k: int, q: float) -> float:
    """Gaussian binomial coefficient [n choose k]_q for integers n >= k >= 0.

    Evaluated multiplicatively as prod_{j=1..m} [n-m+j]_q / [j]_q with
    m = min(k, n-k), pairing each numerator with a same-rank denominator.
    This keeps every factor between 1 and [n]_q and avoids the overflow of
    forming large q-factorials separately.
    """
    q = check_q(q)
    if k < 0 or k > n:
        raise ValueError(f"require n >= k >= 0, got n={n}, k={k}")
    m = min(k, n - k)
    out = 1.0
    if q == 1.0:
        for j in range(1, m + 1):
            out *= (n - m + j) / j
        return out
    for j in range(1, m + 1):
        out *= (1.0 - q ** (n - m + j)) / (1.0 - q**j)
    return out
