"""Confidence sequences: KT mixture arithmetic, schedules, and the DP table.

The KT closed form is pinned against exact double-factorial rationals,
the stage budgets against their telescoping sums, the stateful updates
against single-step closed forms, and the DP threshold table against a
pure-rational brute force.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anytime.sequences import (
    BettingCS,
    Schedule,
    UnionCS,
    bet_cs_width_envelope,
    betting_endpoints,
    dp_thresholds,
    kt_log_mixture,
    kt_log_wealth,
    ub_cs_width_envelope,
)

from oracles import brute_halting_heads, exact_kt_mixture


class TestKtMixture:
    def test_two_heads(self):
        # 0.5 * 0.75: the first two sequential predictions on an all-ones stream
        np.testing.assert_allclose(kt_log_mixture(2, 2), math.log(0.375), atol=1e-12)

    @pytest.mark.parametrize("h,t", [(0, 0), (0, 1), (1, 1), (3, 7), (40, 80), (200, 400), (0, 350)])
    def test_matches_exact_rational(self, h, t):
        expected = 0.0 if t == 0 else math.log(exact_kt_mixture(h, t))
        np.testing.assert_allclose(kt_log_mixture(h, t), expected, atol=1e-10)

    def test_incremental_accumulation_and_order_invariance(self, rng):
        # the stateful product of predictive probabilities must land on the
        # closed form, for a stream and for any permutation of it
        for _ in range(50):
            t = int(rng.integers(1, 120))
            bits = (rng.random(t) < rng.random()).astype(int)
            for stream in (bits, rng.permutation(bits)):
                cs = BettingCS(0.05)
                for b in stream:
                    cs.update(int(b))
                np.testing.assert_allclose(
                    cs.log_mixture, kt_log_mixture(int(bits.sum()), t), atol=1e-9
                )

    def test_wealth_at_zero_time_is_zero(self):
        # initial wealth 1, up to log-gamma rounding
        np.testing.assert_allclose(kt_log_wealth(0, 0, 0.3), 0.0, atol=1e-12)

    def test_wealth_closed_form(self):
        # logW = logQ - logP at a few exact points
        p = Fraction(1, 4)
        for h, t in [(2, 2), (5, 9), (0, 6)]:
            exact = math.log(exact_kt_mixture(h, t) / (p**h * (1 - p) ** (t - h)))
            np.testing.assert_allclose(kt_log_wealth(h, t, 0.25), exact, atol=1e-10)

    def test_degenerate_p_limits(self):
        # a contradicting bit sends the wealth to +inf; a matching constant
        # sample leaves just the mixture likelihood
        assert kt_log_wealth(1, 5, 0.0) == math.inf
        assert kt_log_wealth(4, 5, 1.0) == math.inf
        np.testing.assert_allclose(kt_log_wealth(0, 5, 0.0), kt_log_mixture(0, 5), atol=1e-12)
        np.testing.assert_allclose(kt_log_wealth(5, 5, 1.0), kt_log_mixture(5, 5), atol=1e-12)

    def test_supermartingale_mean(self, rng):
        # E[W_t] = 1 under the true p; check the empirical mean stays within
        # five standard errors at a handful of fixed times
        p, streams, horizon = 0.3, 4000, 64
        bits = (rng.random((streams, horizon)) < p).astype(np.int64)
        heads = bits.cumsum(axis=1)
        for t in (4, 16, 64):
            wealth = np.exp(kt_log_wealth(heads[:, t - 1], t, p))
            se = wealth.std(ddof=1) / math.sqrt(streams)
            assert wealth.mean() <= 1.0 + 5.0 * se


class TestSchedule:
    def test_doubling_budgets(self):
        sched = Schedule.doubling(0.05)
        np.testing.assert_allclose(sched.budget(1), 0.05 / 2)
        np.testing.assert_allclose(sched.budget(3), 0.05 / 12)

    def test_doubling_budget_telescopes(self):
        sched = Schedule.doubling(0.01)
        ks = np.arange(1, 10**6 + 1, dtype=np.float64)
        total = float(np.sum(sched.alpha / (ks * (ks + 1))))
        # partial sum has closed form alpha * K / (K + 1)
        np.testing.assert_allclose(total, 0.01 * ks[-1] / (ks[-1] + 1), atol=1e-12)
        assert total <= sched.alpha

    def test_geometric_budget_telescopes(self):
        sched = Schedule.geometric(0.05)
        total = sum(sched.budget(k) for k in range(1, 200001))
        assert total <= 0.05 + 1e-15
        np.testing.assert_allclose(total, 0.05, atol=1e-5)
        np.testing.assert_allclose(sched.budget(1), 5 * 0.05 / (5 * 6), atol=1e-15)

    def test_hurwitz_normalized_budget(self):
        sched = Schedule(0.05, growth=1.5, poly=1.5, offset=2)
        total = sum(sched.budget(k) for k in range(1, 50001))
        assert total <= 0.05 + 1e-12

    def test_doubling_boundaries(self):
        np.testing.assert_array_equal(
            Schedule.doubling(0.1).boundaries(70), [1, 2, 4, 8, 16, 32, 64]
        )

    def test_geometric_boundaries_deduplicated(self):
        b = Schedule.geometric(0.1).boundaries(30)
        assert b[0] == 1 and b[-1] <= 30
        assert np.all(np.diff(b) >= 1)
        assert len(set(b.tolist())) == b.size

    def test_validation(self):
        with pytest.raises(ValueError):
            Schedule(1.5)
        with pytest.raises(ValueError):
            Schedule(0.05, growth=1.0)
        with pytest.raises(ValueError):
            Schedule(0.05, poly=0.5)


class TestUnionCS:
    def test_first_update_closed_form(self):
        # t = 1 triggers stage 1: per-side budget alpha/4; for a single head
        # the exclusion condition is p > alpha/4
        cs = UnionCS(Schedule.doubling(0.05))
        iv = cs.update(1)
        np.testing.assert_allclose((iv.lo, iv.up), (0.0125, 1.0), atol=1e-9)
        cs = UnionCS(Schedule.doubling(0.05))
        iv = cs.update(0)
        np.testing.assert_allclose((iv.lo, iv.up), (0.0, 0.9875), atol=1e-9)

    def test_interval_frozen_between_boundaries(self):
        cs = UnionCS(Schedule.doubling(0.05))
        cs.update(1)
        at_two = cs.update(1)
        at_three = cs.update(0)  # t = 3 is not a boundary
        assert (at_three.lo, at_three.up) == (at_two.lo, at_two.up)
        at_four = cs.update(0)
        assert (at_four.lo, at_four.up) != (at_three.lo, at_three.up)

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
    def test_nesting(self, bits):
        cs = UnionCS(Schedule.doubling(0.02))
        prev = cs.interval
        for b in bits:
            iv = cs.update(b)
            assert iv.lo >= prev.lo - 1e-12 and iv.up <= prev.up + 1e-12
            prev = iv

    def test_randomized_draws_consumed_lower_side_first(self, rng):
        # with w ~ 1 on the lower side and w ~ 0 on the upper side the
        # interval must match the hand-assembled pair
        draws = iter([1.0, 1e-12])
        cs = UnionCS(Schedule.doubling(0.05), draws=lambda: next(draws))
        iv = cs.update(1)
        # w = 1 on the lower side gives the deterministic bound alpha/4;
        # w ~ 0 on the upper side tightens it to 1 - alpha/4.  Swapped
        # draws would instead collapse the lower side, so this pins the
        # documented draw order.
        np.testing.assert_allclose(iv.lo, 0.0125, atol=1e-9)
        np.testing.assert_allclose(iv.up, 0.9875, atol=1e-9)


class TestBettingCS:
    def test_single_step_closed_forms(self):
        cs = BettingCS(0.05)
        iv = cs.update(1)
        np.testing.assert_allclose((iv.lo, iv.up), (0.025, 1.0), atol=1e-8)
        cs = BettingCS(0.05)
        iv = cs.update(0)
        np.testing.assert_allclose((iv.lo, iv.up), (0.0, 0.975), atol=1e-8)

    def test_two_heads_closed_form(self):
        cs = BettingCS(0.05)
        cs.update(1)
        iv = cs.update(1)
        np.testing.assert_allclose(iv.lo, math.sqrt(0.375 * 0.05), atol=1e-4)
        assert iv.up == 1.0

    def test_all_ones_crosses_half_at_seven(self):
        # first t with (alpha * Q(t, t)) ** (1/t) > 0.5
        cs = BettingCS(0.05)
        crossed = [cs.update(1).lo > 0.5 for _ in range(10)]
        assert crossed.index(True) == 6  # t = 7, zero-based index 6

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=150))
    def test_nesting(self, bits):
        cs = BettingCS(0.01)
        prev = cs.interval
        for b in bits:
            iv = cs.update(b)
            assert iv.lo >= prev.lo - 1e-12 and iv.up <= prev.up + 1e-12
            prev = iv

    def test_endpoints_vectorized_consistency(self, rng):
        bits = (rng.random(80) < 0.6).astype(int)
        heads = bits.cumsum()
        lo, up = betting_endpoints(heads, np.arange(1, 81), 0.05)
        cs = BettingCS(0.05)
        inst = []
        run_lo = 0.0
        for b in bits:
            iv = cs.update(int(b))
            inst.append((iv.lo, iv.up))
        run = np.maximum.accumulate(lo), np.minimum.accumulate(up)
        np.testing.assert_allclose([a for a, _ in inst], run[0], atol=1e-9)
        np.testing.assert_allclose([b for _, b in inst], run[1], atol=1e-9)


class TestFixedFractionBetting:
    @staticmethod
    def _constant_edge_wealth(heads: int, tails: int, edge: float) -> float:
        # a bettor that always stakes the same signed edge per toss; the
        # wealth depends on the stream only through the count difference
        return (1.0 + edge) ** (heads - tails)

    def test_hundred_tosses_51_heads(self):
        np.testing.assert_allclose(self._constant_edge_wealth(51, 49, 0.02), 1.02**2, atol=1e-12)
        assert abs(self._constant_edge_wealth(51, 49, 0.02) - 1.04) < 0.001

    def test_order_invariance_is_trivial(self, rng):
        bits = (rng.random(100) < 0.5).astype(int)
        h = int(bits.sum())
        assert self._constant_edge_wealth(h, 100 - h, 0.02) == self._constant_edge_wealth(
            int(rng.permutation(bits).sum()), 100 - h, 0.02
        )


class TestDpThresholds:
    def test_first_entries_at_half(self):
        table = dp_thresholds(4, 0.5, 0.05)
        # max single-toss wealth is 1 < 20: nothing decidable at t = 1
        assert table[1] == 2
        assert table[0] == 1

    @pytest.mark.parametrize("p,alpha", [(0.5, 0.05), (0.91, 0.001), (0.3, 0.01)])
    def test_matches_exact_rational_brute_force(self, p, alpha):
        table = dp_thresholds(60, p, alpha)
        fp = Fraction(p).limit_denominator(1000)
        fa = Fraction(alpha).limit_denominator(100000)
        for t in range(1, 61):
            assert table[t] == brute_halting_heads(t, fp, fa), f"t={t}"

    def test_nondecreasing(self):
        for p, alpha in [(0.5, 0.05), (0.91, 0.001)]:
            table = dp_thresholds(3000, p, alpha)
            assert np.all(np.diff(table) >= 0)

    def test_sentinel_when_unreachable(self):
        table = dp_thresholds(6, 0.5, 0.001)
        unreachable = table > np.arange(7)
        assert unreachable.all()  # even all heads cannot reach 1000 in 6 tosses

    def test_threshold_equivalence_with_betting_exclusion(self, rng):
        # heads >= H[t] iff the wealth against p clears 1/alpha on the
        # lower side; spot-check on random streams away from ties
        p, alpha = 0.43, 0.01
        table = dp_thresholds(400, p, alpha)
        thr = math.log(1.0 / alpha)
        for _ in range(20):
            bits = (rng.random(400) < 0.7).astype(int)
            heads = bits.cumsum()
            t = np.arange(1, 401)
            by_table = heads >= table[1:]
            by_wealth = (kt_log_wealth(heads, t, p) > thr) & (heads > p * t)
            assert np.array_equal(by_table, by_wealth)


class TestWidthEnvelopes:
    def test_union_envelope_value(self):
        val = ub_cs_width_envelope(1024, 0.001)
        np.testing.assert_allclose(
            val, math.sqrt((math.log(1000.0) + math.log(math.log(1024.0))) / 1024.0), atol=1e-12
        )
        assert abs(val - 0.093) < 1e-3

    def test_betting_envelope_value(self):
        np.testing.assert_allclose(
            bet_cs_width_envelope(256, 0.01),
            math.sqrt((math.log(100.0) + math.log(256.0)) / 256.0),
            atol=1e-12,
        )

    def test_union_rejects_small_t(self):
        with pytest.raises(ValueError):
            ub_cs_width_envelope(2, 0.05)

    def test_nonincreasing_from_eight(self):
        t = np.arange(8, 5000)
        for vals in (ub_cs_width_envelope(t, 0.001), bet_cs_width_envelope(t, 0.001)):
            assert np.all(np.diff(vals) <= 1e-15)

    def test_generalized_form_uses_schedule(self):
        sched = Schedule.geometric(0.001)
        val = ub_cs_width_envelope(1024, 0.001, schedule=sched)
        expected = math.sqrt(
            1.1
            * (math.log(1.0) + math.log(1000.0) + 2.0 * math.log(math.log(1024.0) / math.log(1.1)))
            / 1024.0
        )
        np.testing.assert_allclose(val, expected, atol=1e-12)
