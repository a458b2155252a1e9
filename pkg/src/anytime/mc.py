"""Vectorized Monte Carlo kernels behind the statistical guarantee tests.

The stateful classes in :mod:`anytime.sequences` are the reference
implementations; the kernels here evaluate the same constructions over
whole stream matrices at once so that validity experiments with tens of
thousands of streams finish in seconds.  Unit tests pin the two code
paths against each other on small inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .intervals import lower_tail_mix, rcp_upper_lo, upper_tail_mix
from .sequences import Schedule, betting_endpoints, kt_log_wealth


def bernoulli_matrix(rng: np.random.Generator, streams: int, horizon: int, p: float) -> np.ndarray:
    """``streams x horizon`` matrix of i.i.d. Bernoulli(p) bits."""
    return (rng.random((streams, horizon)) < p).astype(np.uint8)


# ---------------------------------------------------------------------------
# Ever-exclusion (time-uniform validity)


def betting_ever_excluded(bits: np.ndarray, p: float, alpha: float) -> np.ndarray:
    """Per stream: does ``p`` ever leave the betting CS within the horizon?

    ``p`` is outside the instantaneous interval iff the KT wealth against
    ``p`` exceeds ``1/alpha``; the running interval makes any exclusion
    permanent, so ever-exclusion is a max over time of the log-wealth.
    """
    heads = np.cumsum(bits, axis=1, dtype=np.float64)
    trials = np.arange(1, bits.shape[1] + 1, dtype=np.float64)
    log_wealth = kt_log_wealth(heads, trials, p)
    return np.asarray(log_wealth > math.log(1.0 / alpha)).any(axis=1)


def union_ever_excluded(
    bits: np.ndarray,
    p: float,
    schedule: Schedule,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Per stream: does ``p`` ever leave the union-bound CS within the horizon?

    Exclusion can only happen at stage boundaries, where it is a direct
    tail comparison - no endpoint bisection needed.  ``rng`` provides the
    per-stage randomization draws (one array per side, lower-endpoint
    side first); ``None`` runs the deterministic-CP variant.
    """
    n_streams, horizon = bits.shape
    bounds = schedule.boundaries(horizon)
    heads = np.cumsum(bits, axis=1, dtype=np.float64)[:, bounds - 1]
    ever = np.zeros(n_streams, dtype=bool)
    for k, t_k in enumerate(bounds, start=1):
        per_side = schedule.budget(k) / 2.0
        x = heads[:, k - 1]
        w_up = 1.0 if rng is None else rng.random(n_streams)
        ever |= upper_tail_mix(x, int(t_k), p, w_up) <= per_side
        w_lo = 1.0 if rng is None else rng.random(n_streams)
        ever |= lower_tail_mix(x, int(t_k), p, w_lo) <= per_side
    return ever


# ---------------------------------------------------------------------------
# Endpoint traces (running intervals over a whole stream at once)


def betting_trace(bits: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Running betting-CS endpoints after every bit.

    ``bits`` may be 1-d (one stream) or 2-d (streams x time); returns
    running ``(lo, up)`` arrays of the same shape.
    """
    arr = np.atleast_2d(np.asarray(bits))
    heads = np.cumsum(arr, axis=1, dtype=np.float64)
    trials = np.arange(1, arr.shape[1] + 1, dtype=np.float64)
    lo, up = betting_endpoints(heads, trials, alpha)
    run_lo = np.maximum.accumulate(lo, axis=1)
    run_up = np.minimum.accumulate(up, axis=1)
    if np.asarray(bits).ndim == 1:
        return run_lo[0], run_up[0]
    return run_lo, run_up


def union_trace(
    bits: np.ndarray,
    schedule: Schedule,
    rng: np.random.Generator | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Running union-bound CS endpoints after every bit (1-d stream)."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("union_trace expects a single 1-d stream")
    horizon = arr.size
    bounds = schedule.boundaries(horizon)
    heads_at = np.cumsum(arr, dtype=np.int64)[bounds - 1]
    lo_b = np.zeros(bounds.size)
    up_b = np.ones(bounds.size)
    for k, t_k in enumerate(bounds, start=1):
        per_side = schedule.budget(k) / 2.0
        x = int(heads_at[k - 1])
        w_up = 1.0 if rng is None else float(rng.random())
        lo_b[k - 1] = float(rcp_upper_lo(np.asarray(x), int(t_k), per_side, w_up))
        w_lo = 1.0 if rng is None else float(rng.random())
        up_b[k - 1] = 1.0 - float(rcp_upper_lo(np.asarray(int(t_k) - x), int(t_k), per_side, w_lo))
    run_lo_b = np.maximum.accumulate(lo_b)
    run_up_b = np.minimum.accumulate(up_b)
    # Expand the boundary values into per-t step functions.
    run_lo = np.zeros(horizon)
    run_up = np.ones(horizon)
    segment = np.searchsorted(bounds, np.arange(1, horizon + 1), side="right")
    touched = segment >= 1
    run_lo[touched] = run_lo_b[segment[touched] - 1]
    run_up[touched] = run_up_b[segment[touched] - 1]
    return run_lo, run_up


# ---------------------------------------------------------------------------
# Fixed-n interval coverage by simulation (CLI companion to the exact
# enumeration in anytime.intervals)


def mc_coverage(
    n: int,
    p: float,
    alpha: float,
    kind: str,
    side: str,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo coverage estimate of a fixed-n interval construction."""
    if kind not in ("rcp", "cp"):
        raise ValueError(f"unknown kind {kind!r}")
    if side not in ("upper", "lower", "two"):
        raise ValueError(f"unknown side {side!r}")
    x = rng.binomial(n, p, size=trials).astype(np.float64)
    if side == "two":
        w_up = rng.random(trials) if kind == "rcp" else 1.0
        w_lo = rng.random(trials) if kind == "rcp" else 1.0
        covered = (upper_tail_mix(x, n, p, w_up) >= alpha / 2.0) & (
            lower_tail_mix(x, n, p, w_lo) >= alpha / 2.0
        )
    elif side == "upper":
        w = rng.random(trials) if kind == "rcp" else 1.0
        covered = upper_tail_mix(x, n, p, w) >= alpha
    else:
        w = rng.random(trials) if kind == "rcp" else 1.0
        covered = lower_tail_mix(x, n, p, w) >= alpha
    return float(np.mean(covered))
