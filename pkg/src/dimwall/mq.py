"""Non-adaptive membership-query learning of parities, with label noise.

The query plan asks for labels at the all-ones point and at each of its
``d`` single-coordinate flips. Since ``chi_S(flip_i(x)) * chi_S(x) = -1``
exactly when ``i`` is in ``S``, comparing the two labels reads off bit ``i``.
Under random classification noise each point is queried an odd number of
times and majority-voted. ``(d + 1) * repetitions`` labels in total.

This is one simple learner for the model, not the attribute-efficient sparse
parity algorithm; that one is not implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bound import trial_seed
from .boolean import HypercubePoint, ParityIndex

__all__ = [
    "QueryPlan",
    "NoisyOracle",
    "parity_query_plan",
    "learn_parity",
    "recovery_rate",
    "majority_failure_bound",
    "success_lower_bound",
]


@dataclass(frozen=True)
class QueryPlan:
    """Distinct query points, each requested ``repetitions`` times in a row.

    A plan is built from ``(d, repetitions)`` alone, with no oracle anywhere
    in reach, which is what makes the learner non-adaptive.
    """

    d: int
    points: tuple[HypercubePoint, ...]
    repetitions: int = 1

    def __post_init__(self):
        if self.repetitions < 1 or self.repetitions % 2 == 0:
            raise ValueError(f"repetitions must be a positive odd integer, got {self.repetitions}")
        if any(p.d != self.d for p in self.points):
            raise ValueError("query point dimension mismatch")

    @property
    def size(self) -> int:
        """Number of label requests."""
        return len(self.points) * self.repetitions

    def requests(self) -> list[HypercubePoint]:
        return [p for p in self.points for _ in range(self.repetitions)]


@dataclass(frozen=True)
class NoisyOracle:
    """Labels ``chi_target(x)``, each flipped independently with probability ``eta``.

    The flip for request ``i`` at point ``x`` is a pure function of
    ``(seed, x, i)``.
    """

    target: ParityIndex
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta < 0.5:
            raise ValueError(f"eta must lie in [0, 1/2), got {self.eta!r}")

    def _uniforms(self, point: HypercubePoint, count: int) -> np.ndarray:
        ss = np.random.SeedSequence(self.seed, spawn_key=(point.index,))
        return ss.generate_state(count, dtype=np.uint64) / 2.0 ** 64

    def label(self, point: HypercubePoint, request_index: int) -> int:
        y = self.target(np.array(point.coords))
        if self.eta and self._uniforms(point, request_index + 1)[-1] < self.eta:
            return -y
        return y

    def answer(self, plan: QueryPlan) -> np.ndarray:
        """All labels for ``plan``, in request order."""
        out = np.empty(plan.size, dtype=np.int64)
        r = plan.repetitions
        for j, p in enumerate(plan.points):
            y = self.target(np.array(p.coords))
            block = np.full(r, y)
            if self.eta:
                u = self._uniforms(p, (j + 1) * r)[j * r:]
                block[u < self.eta] *= -1
            out[j * r:(j + 1) * r] = block
        return out


def parity_query_plan(d: int, repetitions: int = 1) -> QueryPlan:
    if d < 1:
        raise ValueError("d must be >= 1")
    base = HypercubePoint.ones(d)
    return QueryPlan(d, (base, *(base.flip(i) for i in range(d))), repetitions)


def learn_parity(plan: QueryPlan, labels) -> ParityIndex:
    """Recover the parity mask from plan-ordered ``+-1`` labels by majority vote."""
    y = np.asarray(labels)
    if y.shape != (plan.size,):
        raise ValueError(f"expected {plan.size} labels, got {y.shape}")
    if not np.all(np.abs(y) == 1):
        raise ValueError("labels must be +1 or -1")
    votes = np.sign(y.reshape(len(plan.points), plan.repetitions).sum(axis=1))
    mask = 0
    for i in range(plan.d):
        if votes[i + 1] != votes[0]:
            mask |= 1 << i
    return ParityIndex(plan.d, mask)


def recovery_rate(d: int, eta: float, repetitions: int, trials: int, seed: int) -> float:
    """Fraction of trials in which a uniformly random parity is recovered exactly."""
    if not 0.0 <= eta < 0.5:
        raise ValueError(f"eta must lie in [0, 1/2), got {eta!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    plan = parity_query_plan(d, repetitions)
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng(trial_seed(seed, t))
        target = ParityIndex(d, int(rng.integers(0, 1 << d)))
        oracle = NoisyOracle(target, eta, int(rng.integers(0, 2 ** 63)))
        hits += learn_parity(plan, oracle.answer(plan)) == target
    return hits / trials


def majority_failure_bound(eta: float, repetitions: int) -> float:
    """Hoeffding bound on a wrong majority: ``exp(-2 r (1/2 - eta)^2)``."""
    return math.exp(-2.0 * repetitions * (0.5 - eta) ** 2) if eta > 0 else 0.0


def success_lower_bound(d: int, eta: float, repetitions: int) -> float:
    """Union bound over the ``d + 1`` majorities."""
    return max(0.0, 1.0 - (d + 1) * majority_failure_bound(eta, repetitions))
