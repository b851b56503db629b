"""Shared test oracles."""

import math
from fractions import Fraction


def exact_fisher_two_sided(a: int, b: int, c: int, d: int) -> float:
    """Two-sided Fisher p by exact rational enumeration of all tables
    with the observed margins (point-probability criterion)."""
    n = a + b + c + d
    row1, col1 = a + b, a + c
    lo = max(0, row1 + col1 - n)
    hi = min(row1, col1)
    denom = math.comb(n, row1)
    probs = {
        k: Fraction(math.comb(col1, k) * math.comb(n - col1, row1 - k), denom)
        for k in range(lo, hi + 1)
    }
    p_obs = probs[a]
    return float(sum(p for p in probs.values() if p <= p_obs))
