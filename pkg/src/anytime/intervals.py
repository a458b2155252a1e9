"""Fixed-sample confidence intervals for a Bernoulli mean.

Implements the classical (deterministic) Clopper-Pearson construction, its
randomized refinement with exact ``1 - alpha`` coverage, and the Hoeffding
interval used by the nonadaptive baseline.

The randomized upper construction, for ``x`` observed successes out of ``n``
and an external uniform draw ``w``, keeps ``p`` in the interval iff

    P(B(n, p) > x) + w * P(B(n, p) = x) > alpha.

That tail mixture equals ``w * P(B >= x) + (1 - w) * P(B >= x + 1)``, a
convex combination of two nondecreasing functions of ``p`` - so it is
provably monotone and the endpoint search by bisection always brackets.
The only non-bracketing cases are the clamped endpoints handled explicitly
below (mixture never exceeds ``alpha``: empty improvement, endpoint pinned
to the degenerate side).
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .binom import binom_cdf, binom_sf, log_binom_pmf

_ENDPOINT_TOL = 1e-10


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed subinterval of [0, 1] with endpoints ``lo <= up``."""

    lo: float
    up: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo <= self.up <= 1.0):
            raise ValueError(f"invalid interval [{self.lo}, {self.up}]")

    @property
    def width(self) -> float:
        return self.up - self.lo

    def contains(self, p: float) -> bool:
        return self.lo <= p <= self.up


def _check_interval_args(x: int, n: int, alpha: float, w: float = 1.0) -> None:
    if n < 1 or not 0 <= x <= n:
        raise ValueError(f"need 0 <= x <= n with n >= 1, got x={x} n={n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must be in [0, 1], got {w}")


def upper_tail_mix(x, n, p, w):
    """``P(B(n, p) > x) + w * P(B(n, p) = x)``, nondecreasing in ``p``."""
    return w * binom_sf(x, n, p) + (1.0 - w) * binom_sf(x + 1, n, p)


def lower_tail_mix(x, n, p, w):
    """``P(B(n, p) < x) + w * P(B(n, p) = x)``, nonincreasing in ``p``."""
    return w * binom_cdf(x, n, p) + (1.0 - w) * binom_cdf(x - 1, n, p)


def rcp_upper_lo(x, n, alpha, w, tol: float = _ENDPOINT_TOL):
    """Lower endpoint of the randomized upper interval, vectorized.

    Returns the leftmost ``p`` with ``upper_tail_mix(x, n, p, w) > alpha``
    (the interval is ``[that point, 1]``), or the clamped endpoint when the
    mixture never crosses ``alpha``.  Accepts arrays for ``x`` and ``w``;
    this same kernel backs the scalar API and the Monte Carlo harness so
    the two can never drift apart.
    """
    x = np.asarray(x, dtype=float)
    w_arr = np.broadcast_to(np.asarray(w, dtype=float), x.shape).copy()
    # Mixture at the endpoints of [0, 1]:  F(1) = 1 unless x = n (then w),
    # F(0) = w for x = 0 and 0 otherwise.
    f_one = np.where(x >= n, w_arr, 1.0)
    f_zero = np.where(x <= 0, w_arr, 0.0)
    never = f_one <= alpha  # no p is ever excluded-from-below: clamp to 1
    always = f_zero > alpha  # even p = 0 is retained: endpoint 0
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    for _ in range(_n_iters(tol)):
        mid = 0.5 * (lo + hi)
        above = upper_tail_mix(x, n, mid, w_arr) > alpha
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    out = 0.5 * (lo + hi)
    out = np.where(never, 1.0, np.where(always, 0.0, out))
    return out


def _n_iters(tol: float) -> int:
    return max(1, math.ceil(math.log2(1.0 / tol)))


def rcp_upper(x: int, n: int, alpha: float, w: float) -> Interval:
    """Randomized Clopper-Pearson upper interval ``[lo, 1]``.

    Parameters
    ----------
    x, n : int
        Observed successes out of ``n`` Bernoulli trials.
    alpha : float
        Miscoverage budget in (0, 1).
    w : float
        External randomization draw in [0, 1].  ``w = 1`` recovers the
        deterministic construction; ``w -> 0`` recovers the deterministic
        interval for ``x + 1`` successes.

    Returns
    -------
    Interval
        ``[lo, 1]``, degenerate ``[1, 1]`` when the randomized test keeps
        no ``p`` excluded (empty improvement; endpoint clamped).
    """
    _check_interval_args(x, n, alpha, w)
    lo = float(rcp_upper_lo(np.asarray(x), n, alpha, w))
    return Interval(lo, 1.0)


def rcp_lower(x: int, n: int, alpha: float, w: float) -> Interval:
    """Randomized Clopper-Pearson lower interval ``[0, up]``.

    Mirror image of :func:`rcp_upper`: counting failures instead of
    successes maps the two constructions onto each other, and the
    implementation uses that symmetry directly.
    """
    _check_interval_args(x, n, alpha, w)
    up = 1.0 - float(rcp_upper_lo(np.asarray(n - x), n, alpha, w))
    return Interval(0.0, up)


def cp_upper(x: int, n: int, alpha: float) -> Interval:
    """Deterministic Clopper-Pearson upper interval (``w = 1`` case)."""
    return rcp_upper(x, n, alpha, 1.0)


def cp_lower(x: int, n: int, alpha: float) -> Interval:
    """Deterministic Clopper-Pearson lower interval (``w = 1`` case)."""
    return rcp_lower(x, n, alpha, 1.0)


def rcp_two_sided(x: int, n: int, alpha: float, w_up: float, w_lo: float) -> Interval:
    """Two-sided randomized interval: both one-sided pieces at ``alpha / 2``.

    With independent draws the two pieces can in principle cross; that event
    lives inside an already-miscovering event, so the interval collapses to
    the point at the sample mean (keeps the coverage accounting intact and
    the return type well-formed).
    """
    _check_interval_args(x, n, alpha, 1.0)
    lo = rcp_upper(x, n, alpha / 2.0, w_up).lo
    up = rcp_lower(x, n, alpha / 2.0, w_lo).up
    if lo > up:
        mean = x / n
        return Interval(mean, mean)
    return Interval(lo, up)


def hoeffding_interval(heads: int, trials: int, alpha: float) -> Interval:
    """Two-sided Hoeffding interval ``mean +/- sqrt(ln(2/alpha) / (2 t))``."""
    if trials < 1 or not 0 <= heads <= trials:
        raise ValueError("need 0 <= heads <= trials with trials >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    mean = heads / trials
    half = math.sqrt(math.log(2.0 / alpha) / (2.0 * trials))
    return Interval(max(0.0, mean - half), min(1.0, mean + half))


def hoeffding_sample_size(eps: float, gamma: float) -> int:
    """Samples needed for the fixed-width Hoeffding test: ``ceil(2 ln(1/gamma) / eps^2)``."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    return math.ceil(2.0 * math.log(1.0 / gamma) / (eps * eps))


def enumeration_coverage(
    n: int,
    p: float,
    alpha: float,
    kind: str = "rcp",
    side: str = "upper",
) -> float:
    """Exact coverage of a Clopper-Pearson style interval under ``B(n, p)``.

    Sums, over all outcomes ``x``, the probability that the realized
    interval contains ``p``; for the randomized kind the uniform draw is
    integrated out analytically per outcome (the exclusion event given
    ``X = x`` is ``{W < threshold(x)}``), so no Monte Carlo enters.  For
    the one-sided randomized constructions the sum telescopes to exactly
    ``1 - alpha``; the two-sided variant is slightly conservative because
    independent draws can exclude on both sides at once.

    Parameters
    ----------
    n, p, alpha
        Binomial size, true mean, and miscoverage budget.
    kind : {"rcp", "cp"}
    side : {"upper", "lower", "two"}
    """
    if kind not in ("rcp", "cp"):
        raise ValueError(f"unknown kind {kind!r}")
    if side not in ("upper", "lower", "two"):
        raise ValueError(f"unknown side {side!r}")
    if side == "two":
        ex_up = _exclusion_probs(n, p, alpha / 2.0, kind, "upper")
        ex_lo = _exclusion_probs(n, p, alpha / 2.0, kind, "lower")
        excl = ex_up + ex_lo - ex_up * ex_lo
    else:
        excl = _exclusion_probs(n, p, alpha, kind, side)
    x = np.arange(n + 1)
    pmf = np.exp(log_binom_pmf(x, n, p))
    return float(1.0 - np.sum(pmf * excl))


def _exclusion_probs(n: int, p: float, alpha: float, kind: str, side: str) -> np.ndarray:
    """P(p excluded | X = x) for x = 0..n, with the w-draw integrated out."""
    x = np.arange(n + 1)
    pmf = np.exp(log_binom_pmf(x, n, p))
    if side == "upper":
        # excluded iff upper_tail_mix(x, n, p, W) <= alpha, i.e.
        # W <= (alpha - P(B >= x + 1)) / pmf(x)
        slack = alpha - binom_sf(x + 1, n, p)
    else:
        slack = alpha - binom_cdf(x - 1, n, p)
    if kind == "rcp":
        return np.clip(slack, 0.0, pmf) / np.where(pmf > 0.0, pmf, 1.0) + np.where(
            (pmf == 0.0) & (slack >= 0.0), 1.0, 0.0
        )
    # Deterministic construction: excluded iff the full tail falls strictly
    # below alpha (at exact equality the endpoint sits on p: still covered).
    if side == "upper":
        tail = binom_sf(x, n, p)
    else:
        tail = binom_cdf(x, n, p)
    return (tail < alpha).astype(float)
