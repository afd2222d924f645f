"""Closed-form rank bound and the finite-rank precondition."""
from __future__ import annotations

import math
from fractions import Fraction


def rank_bound(lam, e: int, p: int, n: int, C=0, C_prime=0):
    """``e (p-1) (p^{n-1} + ... + p^m) + C`` with ``m = n - ceil(lam*n + C')``.

    The sum is empty when ``m > n - 1``.  A negative ``m`` is clamped to 0.
    Returns an ``int`` when the result is integral, else a ``Fraction``.
    """
    lam = Fraction(lam)
    if not 0 <= lam < 1:
        raise ValueError("lambda must satisfy 0 <= lambda < 1")
    m = n - math.ceil(lam * n + Fraction(C_prime))
    m = max(m, 0)
    total = e * (p - 1) * sum(p ** k for k in range(m, n)) + Fraction(C)
    return int(total) if total.denominator == 1 else total


def ddr_check(T, S, e: int, p: int) -> bool:
    """``S + e p / (p-1)^2 < T`` as an exact rational comparison."""
    return Fraction(S) + Fraction(e * p, (p - 1) ** 2) < Fraction(T)
