"""Numerically stable binomial and Gaussian primitives.

Every tail probability used by the intervals, confidence sequences and
certification layers funnels through this module, so precision conventions
are controlled in exactly one place.  Tail functions use the regularized
incomplete beta identity

    P(B(n, p) >= x) = I_p(x, n - x + 1),

which stays accurate (~1e-13 relative) for tails far below the 1e-9
absolute accuracy the callers need, and broadcasts over numpy arrays.

Conventions (they differ from scipy.stats.binom, mind the inequality):

* ``binom_sf(x, n, p)``  is the inclusive upper tail  P(B >= x)
* ``binom_cdf(x, n, p)`` is the inclusive lower tail  P(B <= x)
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import special


class Counts(NamedTuple):
    """Running Bernoulli counts: ``heads`` successes out of ``trials``."""

    heads: int
    trials: int

    def validate(self) -> "Counts":
        if self.trials < 0 or not 0 <= self.heads <= self.trials:
            raise ValueError(f"invalid counts {self!r}")
        return self

    @property
    def mean(self) -> float:
        return self.heads / self.trials if self.trials else 0.5


def _check_n_p(n, p) -> None:
    if np.any(np.asarray(n) < 0):
        raise ValueError("n must be nonnegative")
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise ValueError("p must lie in [0, 1]")


def _as_result(value: np.ndarray, scalar: bool) -> float | np.ndarray:
    return float(value) if scalar else value


def log_binom_pmf(x, n, p):
    """Log of the binomial pmf, ``log P(B(n, p) = x)``.

    Parameters
    ----------
    x : int or array_like
        Number of successes.  Values outside ``[0, n]`` give ``-inf``.
    n : int or array_like
        Number of trials.
    p : float or array_like
        Success probability in ``[0, 1]``.  The degenerate endpoints use
        the ``0 * log 0 = 0`` convention, so e.g. ``x = n = 5, p = 1``
        gives ``0.0`` and ``x < n, p = 1`` gives ``-inf``.

    Returns
    -------
    float or ndarray
    """
    _check_n_p(n, p)
    scalar = np.isscalar(x) and np.isscalar(n) and np.isscalar(p)
    x, n, p = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(n, dtype=float), np.asarray(p, dtype=float)
    )
    in_range = (x >= 0) & (x <= n)
    xs = np.where(in_range, x, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            special.gammaln(n + 1.0)
            - special.gammaln(xs + 1.0)
            - special.gammaln(n - xs + 1.0)
            + special.xlogy(xs, p)
            + special.xlog1py(n - xs, -p)
        )
    out = np.where(in_range, out, -np.inf)
    return _as_result(out, scalar)


def binom_sf(x, n, p):
    """Inclusive upper tail ``P(B(n, p) >= x)``.

    ``x <= 0`` returns 1 and ``x > n`` returns 0; otherwise the
    regularized incomplete beta identity ``I_p(x, n - x + 1)`` is used.
    Broadcasts over array inputs.
    """
    _check_n_p(n, p)
    scalar = np.isscalar(x) and np.isscalar(n) and np.isscalar(p)
    x, n, p = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(n, dtype=float), np.asarray(p, dtype=float)
    )
    interior = (x >= 1) & (x <= n)
    xs = np.where(interior, x, 1.0)
    ns = np.where(n >= 1, n, 1.0)
    out = special.betainc(xs, ns - xs + 1.0, p)
    out = np.where(x <= 0, 1.0, np.where(x > n, 0.0, out))
    return _as_result(out, scalar)


def binom_cdf(x, n, p):
    """Inclusive lower tail ``P(B(n, p) <= x)``.

    ``x < 0`` returns 0 and ``x >= n`` returns 1; otherwise
    ``I_{1-p}(n - x, x + 1)``, which keeps tiny lower tails accurate
    instead of computing ``1 - binom_sf``.
    """
    _check_n_p(n, p)
    scalar = np.isscalar(x) and np.isscalar(n) and np.isscalar(p)
    x, n, p = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(n, dtype=float), np.asarray(p, dtype=float)
    )
    interior = (x >= 0) & (x <= n - 1)
    xs = np.where(interior, x, 0.0)
    ns = np.where(n >= 1, n, 1.0)
    out = special.betainc(ns - xs, xs + 1.0, 1.0 - p)
    out = np.where(x < 0, 0.0, np.where(x >= n, 1.0, out))
    return _as_result(out, scalar)


def gauss_quantile(u):
    """Standard normal quantile ``Phi^{-1}(u)`` for ``u`` in (0, 1).

    Absolute error is far below the 1e-9 contract (scipy's ``ndtri`` is
    accurate to machine precision); the open-interval domain is enforced.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("gauss_quantile requires 0 < u < 1")
    out = special.ndtri(u_arr)
    return float(out) if np.isscalar(u) else out


def bisect_monotone(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Locate ``x`` with ``f(x) = target`` for monotone ``f`` on ``[lo, hi]``.

    Runs a fixed ``ceil(log2((hi - lo) / tol))`` halvings, so the call count
    and the returned value are deterministic.  For step functions the
    returned point is the jump location to within ``tol``.  If ``target``
    is not bracketed by ``f(lo)`` and ``f(hi)`` the nearer endpoint is
    returned and the caller interprets (that convention is what the
    interval constructions use for clamped endpoints).

    Parameters
    ----------
    f : callable
        Monotone function of one float.
    target : float
        Level to invert at.
    lo, hi : float
        Bracket with ``lo < hi``.
    tol : float
        Final bracket width; the answer is the bracket midpoint.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    f_lo, f_hi = f(lo), f(hi)
    increasing = f_hi >= f_lo
    if increasing:
        if target <= min(f_lo, f_hi):
            return lo
        if target >= max(f_lo, f_hi):
            return hi
    else:
        if target >= max(f_lo, f_hi):
            return lo
        if target <= min(f_lo, f_hi):
            return hi
    for _ in range(_bisect_iters(lo, hi, tol)):
        mid = 0.5 * (lo + hi)
        below = f(mid) <= target
        if below == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bisect_iters(lo: float, hi: float, tol: float) -> int:
    return max(1, math.ceil(math.log2((hi - lo) / tol)))
