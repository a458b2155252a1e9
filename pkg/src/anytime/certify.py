"""Randomized-smoothing certification on top of the sequential estimators.

A Gaussian-smoothed classifier is provably constant within l2 radius
``r(p_a, p_b) = (sigma/2)(Phi^{-1}(p_a) - Phi^{-1}(p_b))`` of an input,
where ``p_a`` lower-bounds the top class probability and ``p_b``
upper-bounds every other class.  Binary certification collapses the
rest into one superclass via ``p_b <= 1 - p_a``, so certifying radius
``r`` reduces to deciding whether ``p_a`` exceeds the threshold
``Phi(r / sigma)`` - a job for :func:`anytime.decision.decide_with_cs`.
Multiclass certification instead runs two confidence sequences, a lower
bound for the most observed class A and an upper bound for the
*currently* second-most observed class: the runner-up by count was
observed at least as often as the true runner-up, so its bound is wider
and the estimate stays conservative.  That pays off exactly when
``p_a < 1/2``, where the binary reduction can never certify anything.

The radius formula is the only smoothing-specific ingredient; swapping
in another noise distribution means swapping ``radius_gauss_l2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .binom import bisect_monotone, gauss_quantile
from .decision import DEFAULT_CAP, DEFAULT_STAGES, Verdict, decide_with_cs
from .intervals import Interval, cp_upper, rcp_upper_lo
from .sampling import as_bit_source, clamp_take
from .sequences import Schedule, betting_endpoints

DEFAULT_WARMUP = 100
_BLOCK = 4096

CERT_MODES = ("binary", "multiclass")


@dataclass(frozen=True, slots=True)
class CertSpec:
    """Certification target: noise scale, radius, and failure budget.

    ``lam`` is the fraction of ``alpha`` spent on the top-class lower
    bound in multiclass mode (the rest goes to the runner-up's upper
    bound); binary mode ignores it.
    """

    sigma: float
    radius: float
    alpha: float
    mode: str = "binary"
    lam: float = 0.5

    def __post_init__(self) -> None:
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.radius < 0.0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.mode not in CERT_MODES:
            raise ValueError(f"mode must be one of {CERT_MODES}, got {self.mode!r}")
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")


class ClassOracle:
    """Synthetic base classifier: i.i.d. class labels with fixed probabilities.

    Stands in for "one forward pass under noise"; each oracle owns its
    generator so concurrent runs stay independent and reproducible.
    """

    def __init__(self, probs, rng: np.random.Generator):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("probs must be a nonempty 1-d array")
        if np.any(probs < 0.0):
            raise ValueError("probs must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probs must sum to 1 (got {probs.sum()!r})")
        self.probs = probs
        self._cum = np.cumsum(probs)
        self._cum[-1] = 1.0  # guard the top bin against rounding
        self._rng = rng

    @property
    def n_classes(self) -> int:
        return self.probs.size

    def sample(self, k: int) -> np.ndarray:
        """Draw ``k`` class labels."""
        return np.searchsorted(self._cum, self._rng.random(k), side="right").astype(np.int64)


def sample_oracle(oracle: ClassOracle) -> int:
    """Draw a single class label (one simulated forward pass)."""
    return int(oracle.sample(1)[0])


class _IndicatorSource:
    """Bit stream "the oracle emitted the target class"."""

    def __init__(self, oracle: ClassOracle, target: int):
        self._oracle = oracle
        self._target = target

    def take(self, k: int) -> np.ndarray:
        return (self._oracle.sample(k) == self._target).astype(np.uint8)


# ---------------------------------------------------------------------------
# Radius geometry


def radius_gauss_l2(p_a: float, p_b: float, sigma: float) -> float:
    """Certified l2 radius ``(sigma/2)(Phi^{-1}(p_a) - Phi^{-1}(p_b))``.

    Negative when ``p_a < p_b``; callers clamp for reporting.  Both
    probabilities must be interior - the degenerate endpoints have
    infinite quantiles and are handled by the callers' guards.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (0.0 < p_a < 1.0 and 0.0 < p_b < 1.0):
        raise ValueError("radius_gauss_l2 needs interior probabilities")
    return 0.5 * sigma * (gauss_quantile(p_a) - gauss_quantile(p_b))


def binary_threshold(radius: float, sigma: float) -> float:
    """The ``p*`` with ``radius_gauss_l2(p*, 1-p*, sigma) == radius``.

    Inverted by bisection against the radius function itself (one code
    path for the forward and inverse maps), to absolute tolerance 1e-10.
    Equals ``Phi(radius/sigma)``.
    """
    if radius < 0.0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    lim = 1e-12  # quantile gap spans ~14 sigma across this bracket
    return bisect_monotone(
        lambda p: radius_gauss_l2(p, 1.0 - p, sigma), radius, lo=lim, hi=1.0 - lim
    )


def _guarded_radius(lo_a, up_b, sigma: float):
    """Vectorized radius with boundary conventions for CS endpoints.

    ``lo_a = 0`` or ``up_b = 1`` carries no certification evidence:
    radius ``-inf``.  ``lo_a = 1`` or ``up_b = 0`` is infinitely strong:
    ``+inf``.  The uninformative branch wins when both apply.
    """
    lo_a = np.asarray(lo_a, dtype=float)
    up_b = np.asarray(up_b, dtype=float)
    tiny = 1e-15
    gap = gauss_quantile(np.clip(lo_a, tiny, 1.0 - tiny)) - gauss_quantile(
        np.clip(up_b, tiny, 1.0 - tiny)
    )
    r = 0.5 * sigma * gap
    r = np.where((lo_a >= 1.0) | (up_b <= 0.0), np.inf, r)
    return np.where((lo_a <= 0.0) | (up_b >= 1.0), -np.inf, r)


# ---------------------------------------------------------------------------
# Certification drivers

_CERT_FLIP = {
    Verdict.LESS: Verdict.GREATER,  # threshold below the mean -> certified
    Verdict.GREATER: Verdict.LESS,
    Verdict.UNDECIDED: Verdict.UNDECIDED,
}


def certify_binary(
    oracle: ClassOracle,
    target_class: int,
    spec: CertSpec,
    cs_kind: str = "betting",
    cap: int = DEFAULT_CAP,
    schedule: Optional[Schedule] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[Verdict, int]:
    """One-vs-rest certification of ``target_class`` at ``spec.radius``.

    Greater = certified at the radius; Less = not certifiable this way
    (in particular whenever the class probability is below 1/2);
    Undecided at the cap.
    """
    if spec.mode != "binary":
        raise ValueError(f"certify_binary needs mode='binary', got {spec.mode!r}")
    if not 0 <= target_class < oracle.n_classes:
        raise ValueError(f"target_class {target_class} out of range")
    p_star = binary_threshold(spec.radius, spec.sigma)
    verdict, used = decide_with_cs(
        cs_kind,
        p_star,
        _IndicatorSource(oracle, target_class),
        spec.alpha,
        cap,
        schedule=schedule,
        rng=rng,
    )
    return _CERT_FLIP[verdict], used


def certify_multiclass(
    oracle: ClassOracle,
    spec: CertSpec,
    cs_kind: str = "betting",
    cap: int = DEFAULT_CAP,
    schedule: Optional[Schedule] = None,
    rng: Optional[np.random.Generator] = None,
    warmup: int = DEFAULT_WARMUP,
) -> tuple[Verdict, int]:
    """Two-stream certification: lower-bound class A, upper-bound the runner-up.

    A is frozen as the most observed class after ``warmup`` samples
    (which count toward both streams).  The A stream gets budget
    ``lam * alpha`` for its lower bound; the runner-up-by-count stream
    gets ``(1 - lam) * alpha`` for its upper bound, conservatively valid
    for the true runner-up because its count dominates.  Certifies
    (Greater) when the pessimistic radius reaches ``spec.radius``;
    declares non-certifiable (Less) when even the optimistic radius -
    top-class upper bound against runner-up lower bound - falls short,
    which requires two-sided streams and so never happens with the
    one-sided union updates.
    """
    if spec.mode != "multiclass":
        raise ValueError(f"certify_multiclass needs mode='multiclass', got {spec.mode!r}")
    if oracle.n_classes < 2:
        raise ValueError("multiclass certification needs >= 2 classes")
    if cs_kind not in ("betting", "union"):
        raise ValueError(f"unknown cs_kind {cs_kind!r}")
    if warmup < 1:
        raise ValueError(f"warmup must be >= 1, got {warmup}")
    if cap <= warmup:
        oracle.sample(cap)
        return Verdict.UNDECIDED, cap

    counts = np.bincount(oracle.sample(warmup), minlength=oracle.n_classes).astype(np.int64)
    a_cls = int(np.argmax(counts))
    if cs_kind == "betting":
        return _multiclass_betting(oracle, spec, cap, counts, a_cls, warmup)
    sched = schedule if schedule is not None else Schedule.doubling(spec.alpha)
    if sched.alpha != spec.alpha:
        raise ValueError("schedule.alpha must match spec.alpha")
    return _multiclass_union(oracle, spec, cap, counts, a_cls, warmup, sched, rng)


def _runner_up(counts: np.ndarray, a_cls: int) -> int:
    others = np.delete(counts, a_cls)
    return int(others.max()) if others.size else 0


def _multiclass_betting(oracle, spec, cap, counts, a_cls, warmup):
    alpha_a = spec.lam * spec.alpha
    alpha_b = (1.0 - spec.lam) * spec.alpha
    k_classes = oracle.n_classes
    # running bounds: pessimistic pair (la, ub) certifies, optimistic
    # pair (ua, lb) refutes
    la = lb = 0.0
    ua = ub = 1.0

    def scan(h_a, m_b, t_arr):
        nonlocal la, ua, lb, ub
        lo_a, up_a = betting_endpoints(h_a, t_arr, alpha_a)
        lo_b, up_b = betting_endpoints(m_b, t_arr, alpha_b)
        la_r = np.maximum.accumulate(np.concatenate(([la], lo_a)))[1:]
        ua_r = np.minimum.accumulate(np.concatenate(([ua], up_a)))[1:]
        lb_r = np.maximum.accumulate(np.concatenate(([lb], lo_b)))[1:]
        ub_r = np.minimum.accumulate(np.concatenate(([ub], up_b)))[1:]
        cert = _guarded_radius(la_r, ub_r, spec.sigma) >= spec.radius
        refute = _guarded_radius(ua_r, lb_r, spec.sigma) < spec.radius
        hit = cert | refute
        if hit.any():
            i = int(np.argmax(hit))
            verdict = Verdict.GREATER if cert[i] else Verdict.LESS
            return verdict, int(t_arr[i])
        la, ua, lb, ub = la_r[-1], ua_r[-1], lb_r[-1], ub_r[-1]
        return None

    t = warmup
    out = scan(np.array([counts[a_cls]]), np.array([_runner_up(counts, a_cls)]), np.array([t]))
    if out is not None:
        return out
    eye = np.eye(k_classes, dtype=np.int64)
    while t < cap:
        k = min(_BLOCK, cap - t)
        labels = oracle.sample(k)
        cum = counts[None, :] + np.cumsum(eye[labels], axis=0)
        h_a = cum[:, a_cls].copy()
        cum[:, a_cls] = -1
        m_b = cum.max(axis=1)
        t_arr = t + np.arange(1, k + 1, dtype=np.int64)
        counts += np.bincount(labels, minlength=k_classes)
        out = scan(h_a, m_b, t_arr)
        if out is not None:
            return out
        t += k
    return Verdict.UNDECIDED, cap


def _multiclass_union(oracle, spec, cap, counts, a_cls, warmup, sched, rng):
    # one-sided updates: the whole per-stage share goes to the single
    # bound each stream needs, so there is no upper bound on A (and no
    # lower bound on B) - the refute branch can never fire
    la, ub = 0.0, 1.0
    t = warmup
    for k_idx, t_k in enumerate(sched.boundaries(cap), start=1):
        t_k = int(t_k)
        if t_k <= warmup:  # budget stays indexed by the global stage count
            continue
        counts += np.bincount(oracle.sample(t_k - t), minlength=oracle.n_classes)
        t = t_k
        budget = sched.budget(k_idx)
        w_a = 1.0 if rng is None else float(rng.random())
        la = max(la, float(rcp_upper_lo(counts[a_cls], t, spec.lam * budget, w_a)))
        w_b = 1.0 if rng is None else float(rng.random())
        m = _runner_up(counts, a_cls)
        ub = min(ub, 1.0 - float(rcp_upper_lo(t - m, t, (1.0 - spec.lam) * budget, w_b)))
        if float(_guarded_radius(la, ub, spec.sigma)) >= spec.radius:
            return Verdict.GREATER, t
    return Verdict.UNDECIDED, cap


def certify_staged(
    oracle: ClassOracle,
    target_class: int,
    spec: CertSpec,
    stages: Sequence[int] = DEFAULT_STAGES,
) -> tuple[Verdict, int]:
    """Fixed-ladder baseline: one-sided CP certification at each stage.

    Splits ``alpha`` evenly across the cumulative stages; at each one,
    certifies (Greater) if the deterministic CP lower bound at budget
    ``alpha/s`` clears the binary threshold, otherwise moves to the next
    stage; abstains after the last.  One-sided by construction: it never
    declares non-certifiability.
    """
    if spec.mode != "binary":
        raise ValueError(f"certify_staged needs mode='binary', got {spec.mode!r}")
    stages = tuple(int(n) for n in stages)
    if not stages or stages[0] < 1 or any(b <= a for a, b in zip(stages, stages[1:])):
        raise ValueError("stages must be strictly increasing positive sizes")
    p_star = binary_threshold(spec.radius, spec.sigma)
    per_stage = spec.alpha / len(stages)
    source = _IndicatorSource(oracle, target_class)
    heads, t = 0, 0
    for n_i in stages:
        heads += int(source.take(n_i - t).sum())
        t = n_i
        if cp_upper(heads, t, per_stage).lo > p_star:
            return Verdict.GREATER, t
    return Verdict.ABSTAIN, t


# ---------------------------------------------------------------------------
# Width-target estimation task


def width_target_run(
    stream,
    eps: float,
    alpha: float,
    cs_kind: str = "betting",
    cap: int = DEFAULT_CAP,
    schedule: Optional[Schedule] = None,
    rng: Optional[np.random.Generator] = None,
    block: int = _BLOCK,
) -> tuple[Interval, int]:
    """Run a confidence sequence until its running width drops below ``eps``.

    The width is checked after each update, so the run always consumes
    at least one sample (``eps >= 1`` terminates right there: any single
    update leaves width strictly below 1).  Returns the running interval
    and the sample count at termination - width < ``eps`` whenever that
    is before ``cap``.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    source = as_bit_source(stream)
    if cs_kind == "betting":
        return _width_target_betting(source, eps, alpha, cap, block)
    if cs_kind != "union":
        raise ValueError(f"unknown cs_kind {cs_kind!r}")
    sched = schedule if schedule is not None else Schedule.doubling(alpha)
    if sched.alpha != alpha:
        raise ValueError("schedule.alpha must match alpha")
    return _width_target_union(source, eps, cap, sched, rng)


def _width_target_betting(source, eps, alpha, cap, block):
    lo_run, up_run = 0.0, 1.0
    heads, t = 0, 0
    while t < cap:
        k = clamp_take(source, min(block, cap - t))
        bits = source.take(k)
        h = heads + np.cumsum(bits, dtype=np.int64)
        t_arr = t + np.arange(1, k + 1, dtype=np.int64)
        lo, up = betting_endpoints(h, t_arr, alpha)
        lo_r = np.maximum.accumulate(np.concatenate(([lo_run], lo)))[1:]
        up_r = np.minimum.accumulate(np.concatenate(([up_run], up)))[1:]
        hit = (up_r - lo_r) < eps
        if hit.any():
            i = int(np.argmax(hit))
            return Interval(min(lo_r[i], up_r[i]), max(lo_r[i], up_r[i])), int(t_arr[i])
        lo_run, up_run = float(lo_r[-1]), float(up_r[-1])
        heads, t = int(h[-1]), int(t_arr[-1])
    return Interval(lo_run, up_run), cap


def _width_target_union(source, eps, cap, sched, rng):
    lo_run, up_run = 0.0, 1.0
    heads, t = 0, 0
    for k_idx, t_k in enumerate(sched.boundaries(cap), start=1):
        t_k = int(t_k)
        heads += int(source.take(t_k - t).sum())
        t = t_k
        per_side = sched.budget(k_idx) / 2.0
        w_lo = 1.0 if rng is None else float(rng.random())
        lo = float(rcp_upper_lo(heads, t, per_side, w_lo))
        w_up = 1.0 if rng is None else float(rng.random())
        up = 1.0 - float(rcp_upper_lo(t - heads, t, per_side, w_up))
        lo_run, up_run = max(lo_run, lo), min(up_run, up)
        if lo_run > up_run:  # crossed: collapse to the sample mean
            lo_run = up_run = heads / t
        if up_run - lo_run < eps:
            return Interval(lo_run, up_run), t
    return Interval(lo_run, up_run), cap
