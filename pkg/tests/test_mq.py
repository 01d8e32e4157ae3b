import inspect
import math

import numpy as np
import pytest

from dimwall.boolean import HypercubePoint, ParityIndex
from dimwall.mq import (
    NoisyOracle,
    QueryPlan,
    learn_parity,
    majority_failure_bound,
    parity_query_plan,
    recovery_rate,
    success_lower_bound,
)


def noiseless_labels(plan, target):
    return [target(np.array(p.coords)) for p in plan.requests()]


class TestPlan:
    def test_d3(self):
        plan = parity_query_plan(3)
        assert [p.coords for p in plan.points] == [
            (1, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, -1)]

    def test_count(self):
        assert parity_query_plan(16).size == 17
        assert parity_query_plan(16, 25).size == 425
        assert len(parity_query_plan(5, 3).requests()) == 18

    def test_even_repetitions_rejected(self):
        with pytest.raises(ValueError):
            parity_query_plan(4, 2)

    def test_non_adaptive_by_signature(self):
        # the plan is a function of (d, repetitions) only
        assert list(inspect.signature(parity_query_plan).parameters) == ["d", "repetitions"]
        a, b = parity_query_plan(6, 3), parity_query_plan(6, 3)
        assert a == b

    def test_point_dims_checked(self):
        with pytest.raises(ValueError):
            QueryPlan(3, (HypercubePoint.ones(2),), 1)


class TestLearner:
    def test_single_bit(self):
        plan = parity_query_plan(3)
        target = ParityIndex.from_set(3, [2])
        labels = noiseless_labels(plan, target)
        assert labels == [1, 1, -1, 1]
        assert learn_parity(plan, labels) == target

    def test_empty_target(self):
        plan = parity_query_plan(5)
        labels = noiseless_labels(plan, ParityIndex(5, 0))
        assert len(set(labels)) == 1
        assert learn_parity(plan, labels).mask == 0

    @pytest.mark.parametrize("d", range(1, 11))
    def test_exhaustive_noiseless(self, d):
        plan = parity_query_plan(d)
        for mask in range(1 << d):
            t = ParityIndex(d, mask)
            assert learn_parity(plan, noiseless_labels(plan, t)) == t

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            learn_parity(parity_query_plan(3), [1, 1, 1])

    def test_majority_corrects_minority_flips(self):
        plan = parity_query_plan(4, 5)
        t = ParityIndex(4, 0b1010)
        labels = np.array(noiseless_labels(plan, t))
        labels[::5] *= -1
        labels[1::5] *= -1
        assert learn_parity(plan, labels) == t


class TestOracle:
    def test_eta_range(self):
        with pytest.raises(ValueError):
            NoisyOracle(ParityIndex(3, 1), 0.5)

    def test_reproducible_labels(self):
        plan = parity_query_plan(6, 7)
        o = NoisyOracle(ParityIndex(6, 0b100101), 0.3, seed=99)
        a = o.answer(plan)
        np.testing.assert_array_equal(a, o.answer(plan))
        singles = [o.label(p, i) for i, p in enumerate(plan.requests())]
        np.testing.assert_array_equal(a, singles)

    def test_noise_rate(self):
        plan = parity_query_plan(8, 501)
        t = ParityIndex(8, 0b11)
        o = NoisyOracle(t, 0.2, seed=3)
        flips = np.mean(o.answer(plan) != np.array(noiseless_labels(plan, t)))
        assert abs(flips - 0.2) < 0.015

    def test_noiseless_oracle(self):
        plan = parity_query_plan(5, 3)
        t = ParityIndex(5, 0b10110)
        np.testing.assert_array_equal(NoisyOracle(t).answer(plan), noiseless_labels(plan, t))


class TestRecovery:
    def test_noiseless(self):
        assert recovery_rate(8, 0.0, 1, 50, seed=1) == 1.0
        assert recovery_rate(8, 0.0, 9, 20, seed=1) == 1.0

    def test_noisy_with_repetition(self):
        rate = recovery_rate(16, 0.2, 25, 200, seed=2024)
        assert rate >= 0.95

    def test_noisy_single_queries(self):
        rate = recovery_rate(16, 0.2, 1, 200, seed=2024)
        # every one of the 17 labels must be clean: 0.8^17 ~ 0.0225
        assert rate < 0.95
        assert abs(rate - 0.8 ** 17) <= 3 * math.sqrt(0.8 ** 17 * (1 - 0.8 ** 17) / 200) + 1e-12

    def test_deterministic(self):
        assert recovery_rate(6, 0.25, 5, 100, 7) == recovery_rate(6, 0.25, 5, 100, 7)

    def test_rejects_bad_eta(self):
        with pytest.raises(ValueError):
            recovery_rate(4, 0.5, 1, 10, 0)

    def test_monotone_in_repetitions(self):
        trials = 1000
        rates = [recovery_rate(4, 0.2, r, trials, seed=100 + r) for r in (1, 3, 5, 7, 9)]
        for lo, hi in zip(rates, rates[1:]):
            p = (lo + hi) / 2
            assert hi >= lo - 3 * math.sqrt(p * (1 - p) / trials)

    def test_hoeffding_bounds(self):
        assert majority_failure_bound(0.2, 25) == pytest.approx(math.exp(-4.5))
        assert success_lower_bound(16, 0.2, 25) == pytest.approx(1 - 17 * math.exp(-4.5))
        assert success_lower_bound(16, 0.0, 1) == 1.0
        assert recovery_rate(16, 0.2, 25, 200, 5) >= success_lower_bound(16, 0.2, 25)
