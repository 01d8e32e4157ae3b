"""The dimension lower bound for linear methods and the Boas-Bellman inequality.

For unit-norm ``phi_1..phi_N`` and a (possibly random) finite-dimensional
subspace ``W`` with ``r = E[dim W]``,

    eps = (1/N) sum_i E[ inf_{g in W} ||g - phi_i||^2 ]
    r  >= N (1 - eps) / (1 + sqrt(sum_{i != j} <phi_i, phi_j>^2))

with equality when the ``phi_i`` are an orthonormal basis of the whole space.
Everything here evaluates both sides exactly on finite spaces (deterministic
``W``) or by seeded Monte Carlo over a :class:`SubspaceSampler`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .hilbert import (
    FuncVec,
    Subspace,
    _common_space,
    _same_space,
    _stack,
    gram,
    residuals_sq,
)

__all__ = [
    "UNIT_NORM_TOL",
    "UnitNormError",
    "TheoremViolation",
    "TrialError",
    "BoundReport",
    "SubspaceSampler",
    "BoasBellman",
    "coherence",
    "lower_bound",
    "epsilon_deterministic",
    "proof_chain",
    "theorem1_report",
    "theorem1_monte_carlo",
    "boas_bellman_check",
    "trial_seed",
]

UNIT_NORM_TOL = 1e-6
SLACK_TOL = 1e-9


class UnitNormError(ValueError):
    """A function that must have unit norm does not."""


class TheoremViolation(ArithmeticError):
    """The lower bound failed; always an implementation bug."""


class TrialError(RuntimeError):
    """A Monte Carlo trial failed; carries its index and derived seed."""

    def __init__(self, trial: int, seed: int, cause: Exception):
        super().__init__(f"trial {trial} (seed {seed}) failed: {cause}")
        self.trial = trial
        self.seed = seed


@dataclass(frozen=True)
class BoundReport:
    n_functions: int
    r: float
    epsilon: float
    coherence: float
    bound_value: float
    slack: float
    mode: str = "deterministic"
    trials: int = 1
    r_stderr: float = 0.0
    epsilon_stderr: float = 0.0
    # standard error of the per-trial slack (r_t - bound(eps_t))
    slack_stderr: float = 0.0

    def recomputed_bound(self) -> float:
        return lower_bound(self.n_functions, self.epsilon, self.coherence)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass(frozen=True)
class SubspaceSampler:
    """A random subspace: ``draw(seed)`` must be a pure function of ``seed``."""

    description: str
    draw: Callable[[int], Subspace]


class BoasBellman(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def lower_bound(n_functions: int, epsilon: float, coherence: float) -> float:
    """``N (1 - eps) / (1 + coherence)``."""
    return n_functions * (1.0 - epsilon) / (1.0 + coherence)


def _check_unit(phis: Sequence[FuncVec]) -> np.ndarray:
    if not phis:
        raise ValueError("need at least one function")
    space = _common_space(phis)
    a = _stack(phis)
    norms = np.einsum("ij,ij,j->i", a, a, space.weights)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
    if bad.size:
        i = int(bad[0])
        raise UnitNormError(f"function {i} has squared norm {norms[i]!r}, expected 1")
    return a


def _offdiag_coherence(g: np.ndarray) -> float:
    off = g.copy()
    np.fill_diagonal(off, 0.0)
    return math.sqrt(math.fsum((off * off).ravel().tolist()))


def coherence(phis: Sequence[FuncVec]) -> float:
    """``sqrt(sum over ordered pairs i != j of <phi_i, phi_j>^2)`` for unit-norm phis."""
    _check_unit(phis)
    return _offdiag_coherence(gram(phis))


def epsilon_deterministic(phis: Sequence[FuncVec], w: Subspace) -> float:
    """Average squared distance from the phis to a fixed subspace."""
    _check_unit(phis)
    res = residuals_sq(phis, w)
    return math.fsum(res.tolist()) / len(phis)


def proof_chain(phis: Sequence[FuncVec], w: Subspace) -> dict:
    """Both sides of the summation swap in the proof, plus the residual form.

    Returns ``residual_form`` (mean of residuals), ``by_function`` (sum over
    i then k of ``<u_k, phi_i>^2``) and ``by_basis`` (k then i), each turned
    into ``1 - sum / N``.
    """
    a = _check_unit(phis)
    _same_space(phis[0].space, w.space)
    n = len(phis)
    c = (a * w.space.weights) @ w.vectors.T  # c[i, k] = <u_k, phi_i>
    sq = c * c
    by_function = math.fsum(math.fsum(row) for row in sq.tolist())
    by_basis = math.fsum(math.fsum(col) for col in sq.T.tolist())
    return {
        "residual_form": epsilon_deterministic(phis, w),
        "by_function": 1.0 - by_function / n,
        "by_basis": 1.0 - by_basis / n,
    }


def _report(n, r, eps, coh, **extra) -> BoundReport:
    bv = lower_bound(n, eps, coh)
    slack = r - bv
    if slack < -SLACK_TOL * n:
        raise TheoremViolation(
            f"r={r!r} < bound {bv!r} (eps={eps!r}, coherence={coh!r}); slack {slack!r}")
    return BoundReport(n_functions=n, r=r, epsilon=eps, coherence=coh,
                       bound_value=bv, slack=slack, **extra)


def theorem1_report(phis: Sequence[FuncVec], w: Subspace) -> BoundReport:
    """All bound quantities for a fixed subspace ``w`` (``r = rank(w)``)."""
    coh = coherence(phis)
    eps = epsilon_deterministic(phis, w)
    return _report(len(phis), float(w.rank), eps, coh)


def trial_seed(master: int, trial: int) -> int:
    """Seed for one trial, derived by counter from the master seed.

    Independent of evaluation order, so trials can run concurrently.
    """
    ss = np.random.SeedSequence(master, spawn_key=(trial,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def theorem1_monte_carlo(phis: Sequence[FuncVec], sampler: SubspaceSampler,
                         trials: int, seed: int, workers: int = 1) -> BoundReport:
    """Estimate ``r`` and ``eps`` over ``trials`` independent draws of ``W``.

    Results are reduced in trial order, so the report does not depend on
    ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_unit(phis)
    coh = coherence(phis)
    n = len(phis)

    def one(t: int) -> tuple[float, float]:
        s = trial_seed(seed, t)
        try:
            w = sampler.draw(s)
            return float(w.rank), epsilon_deterministic(phis, w)
        except Exception as exc:
            raise TrialError(t, s, exc) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(one, range(trials)))
    else:
        out = [one(t) for t in range(trials)]
    ranks = np.array([o[0] for o in out])
    epss = np.array([o[1] for o in out])
    slacks = ranks - n * (1.0 - epss) / (1.0 + coh)
    r = math.fsum(ranks.tolist()) / trials
    eps = math.fsum(epss.tolist()) / trials
    bv = lower_bound(n, eps, coh)
    return BoundReport(
        n_functions=n, r=r, epsilon=eps, coherence=coh, bound_value=bv,
        slack=r - bv, mode="monte_carlo", trials=trials,
        r_stderr=_stderr(ranks), epsilon_stderr=_stderr(epss),
        slack_stderr=_stderr(slacks),
    )


def boas_bellman_check(g: FuncVec, phis: Sequence[FuncVec]) -> BoasBellman:
    """Bessel-type bound for arbitrary (non-orthogonal, non-unit) phis.

    ``sum_i <g, phi_i>^2 <= <g, g> (max_i <phi_i, phi_i> + coherence)``,
    where coherence is computed from the raw Gram matrix. This is the
    first-power form; a variant with ``<g,g>`` and ``<phi_i,phi_i>`` squared
    agrees with it whenever every vector has unit norm.
    """
    space = _common_space([g, *phis])
    a = _stack(phis)
    c = a @ (space.weights * g.values)
    lhs = math.fsum((c * c).tolist())
    gg = math.fsum((space.weights * g.values * g.values).tolist())
    gm = gram(phis)
    rhs = gg * (float(np.max(np.diag(gm))) + _offdiag_coherence(gm))
    return BoasBellman(lhs, rhs, lhs <= rhs + 1e-9 * max(1.0, rhs))
