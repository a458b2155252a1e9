"""Slow, independent reference implementations used only by the tests.

Nothing in here imports from :mod:`anytime`.  Binomial tails are exact
rational sums via :mod:`fractions`, the Gaussian cdf comes from
``math.erf``, its quantile from bisection, and the Krichevsky-Trofimov
mixture from exact double-factorial products.  All of it is O(n) or
worse per call; the point is to pin the fast code paths against
arithmetic that cannot share their bugs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


# ---------------------------------------------------------------------------
# Exact binomial tails


def exact_binom_pmf(x: int, n: int, p: Fraction) -> Fraction:
    if x < 0 or x > n:
        return Fraction(0)
    return math.comb(n, x) * p**x * (1 - p) ** (n - x)


def exact_binom_sf(x: int, n: int, p: Fraction) -> Fraction:
    """P(Binomial(n, p) >= x), exactly."""
    if x <= 0:
        return Fraction(1)
    return sum((exact_binom_pmf(k, n, p) for k in range(x, n + 1)), Fraction(0))


def exact_binom_cdf(x: int, n: int, p: Fraction) -> Fraction:
    """P(Binomial(n, p) <= x), exactly."""
    if x >= n:
        return Fraction(1)
    return sum((exact_binom_pmf(k, n, p) for k in range(0, x + 1)), Fraction(0))


# ---------------------------------------------------------------------------
# Gaussian cdf / quantile without scipy


def gauss_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def gauss_quantile_by_bisection(u: float, tol: float = 1e-13) -> float:
    if not 0.0 < u < 1.0:
        raise ValueError("u must be in (0, 1)")
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gauss_cdf(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Exact KT mixture likelihood Q(h, t)
#
# Q(h, t) = prod_{i=1}^{h} (2i-1) * prod_{i=1}^{t-h} (2i-1) / (2^t * t!)
# -- the product of the (H+1/2)/(t+1) predictive probabilities in any
# order.  Exact as a Fraction; floats underflow past t ~ 800, so keep
# oracle calls to modest t.


@lru_cache(maxsize=None)
def _odd_factorial(m: int) -> int:
    """1 * 3 * 5 * ... * (2m - 1); equals 1 for m = 0."""
    out = 1
    for i in range(1, m + 1):
        out *= 2 * i - 1
    return out


def exact_kt_mixture(h: int, t: int) -> Fraction:
    if not 0 <= h <= t:
        raise ValueError("need 0 <= h <= t")
    return Fraction(_odd_factorial(h) * _odd_factorial(t - h), 2**t * math.factorial(t))


def exact_kt_log_wealth(h: int, t: int, p: Fraction) -> float:
    """log of Q(h, t) / (p^h (1-p)^(t-h)); p must be a Fraction in (0, 1)."""
    wealth = exact_kt_mixture(h, t) / (p**h * (1 - p) ** (t - h))
    return math.log(wealth)


def brute_halting_heads(t: int, p: Fraction, alpha: Fraction) -> int:
    """Minimal h with h > p*t and KT wealth >= 1/alpha; t+1 if none.

    Pure-rational comparison; no logs, no floats.
    """
    target = 1 / alpha
    for h in range(t + 1):
        if h <= p * t:
            continue
        wealth = exact_kt_mixture(h, t) / (p**h * (1 - p) ** (t - h))
        if wealth >= target:
            return h
    return t + 1


# ---------------------------------------------------------------------------
# Hoeffding bits


def exact_hoeffding_halfwidth(t: int, alpha: float) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * t))
