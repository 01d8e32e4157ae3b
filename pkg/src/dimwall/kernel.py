"""Kernel methods on a finite space and their sample-size wall.

A kernel method trained on points ``x_1..x_n`` outputs
``x -> sum_i alpha_i K(x, x_i)``, an element of the span of ``n`` kernel
sections. That span is fixed once the points are, whatever the labels, so
the dimension bound applies: against ``N`` orthonormal targets, error ``eps``
forces ``n >= (1 - eps) N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .bound import SubspaceSampler
from .hilbert import DEFAULT_REL_TOL, DiscreteSpace, FuncVec, Subspace, _same_space, norm_sq, orthonormalize

__all__ = [
    "KernelSpec",
    "LabeledSample",
    "KernelFit",
    "builtin_kernels",
    "get_kernel",
    "kernel_names",
    "gaussian_kernel",
    "polynomial_kernel",
    "linear_kernel",
    "kernel_section",
    "kernel_sections",
    "method_subspace",
    "fit",
    "mse_under_P",
    "sample_size_lower_bound",
    "iid_design_sampler",
    "iid_design",
    "deterministic_design",
    "labels_for",
]


@dataclass(frozen=True)
class KernelSpec:
    """A positive definite kernel.

    ``eval`` works on a single pair of points. ``block``, when given, is a
    vectorized ``(X, Y) -> Gram`` used for speed; it must agree with ``eval``.
    """

    name: str
    eval: Callable[[np.ndarray, np.ndarray], float]
    params: Mapping[str, float] = field(default_factory=dict)
    block: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def matrix(self, xs, ys) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        if self.block is not None:
            return self.block(xs, ys)
        return np.array([[self.eval(x, y) for y in ys] for x in xs])


def _scale(scale, x) -> float:
    return float(scale) if scale is not None else 1.0 / x.shape[-1]


def gaussian_kernel(gamma: float | None = None) -> KernelSpec:
    """``exp(-gamma ||x - y||^2)``; ``gamma`` defaults to ``1/d``."""

    def ev(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return float(np.exp(-_scale(gamma, x) * np.sum((x - y) ** 2)))

    def blk(X, Y):
        g = _scale(gamma, X)
        sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
        return np.exp(-g * np.maximum(sq, 0.0))

    params = {} if gamma is None else {"gamma": float(gamma)}
    return KernelSpec("gaussian", ev, params, blk)


def polynomial_kernel(degree: int = 3, scale: float | None = None) -> KernelSpec:
    """``(1 + scale <x, y>)^degree``; ``scale`` defaults to ``1/d``."""

    def ev(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return float((1.0 + _scale(scale, x) * np.dot(x, y)) ** degree)

    def blk(X, Y):
        return (1.0 + _scale(scale, X) * (X @ Y.T)) ** degree

    params = {"degree": float(degree)}
    if scale is not None:
        params["scale"] = float(scale)
    return KernelSpec("polynomial", ev, params, blk)


def linear_kernel(scale: float | None = None) -> KernelSpec:
    """Linear plus constant, ``1 + scale <x, y>``; ``scale`` defaults to ``1/d``."""
    k = polynomial_kernel(1, scale)
    params = {} if scale is None else {"scale": float(scale)}
    return KernelSpec("linear", k.eval, params, k.block)


_FACTORIES = {
    "gaussian": gaussian_kernel,
    "polynomial": polynomial_kernel,
    "linear": linear_kernel,
}


def kernel_names() -> list[str]:
    return list(_FACTORIES)


def get_kernel(name: str, **params) -> KernelSpec:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise KeyError(f"unknown kernel {name!r}; choose from {kernel_names()}") from None
    return factory(**params)


def builtin_kernels() -> list[KernelSpec]:
    """Gaussian (gamma=1/d), polynomial (degree 3, scale 1/d) and linear-plus-constant."""
    return [gaussian_kernel(), polynomial_kernel(), linear_kernel()]


@dataclass(frozen=True)
class LabeledSample:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=np.float64))
        ys = np.asarray(self.ys, dtype=np.float64).ravel()
        if xs.shape[0] != ys.shape[0]:
            raise ValueError(f"{xs.shape[0]} points but {ys.shape[0]} labels")
        if not np.all(np.isfinite(ys)):
            raise ValueError("labels must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return self.xs.shape[0]


@dataclass(frozen=True)
class KernelFit:
    kernel: KernelSpec
    xs: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        if len(self.alphas) != len(self.xs):
            raise ValueError("need one coefficient per anchor point")

    def predict(self, points) -> np.ndarray:
        return self.kernel.matrix(points, self.xs) @ self.alphas

    def as_funcvec(self, space: DiscreteSpace) -> FuncVec:
        for x in self.xs:
            space.index_of(x)
        return FuncVec(space, self.predict(space.coords))


def _locate(space: DiscreteSpace, x) -> int:
    try:
        return space.index_of(x)
    except KeyError:
        raise ValueError(f"point {np.asarray(x).tolist()} is not in {space!r}") from None


def kernel_section(k: KernelSpec, x0, space: DiscreteSpace) -> FuncVec:
    """The function ``x -> K(x, x0)`` on ``space``."""
    _locate(space, x0)
    vals = k.matrix(space.coords, np.atleast_1d(np.asarray(x0, dtype=np.float64))[None, :])[:, 0]
    return FuncVec(space, vals)


def kernel_sections(k: KernelSpec, xs, space: DiscreteSpace) -> list[FuncVec]:
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    for x in xs:
        _locate(space, x)
    cols = k.matrix(space.coords, xs)
    return [FuncVec(space, cols[:, j]) for j in range(xs.shape[0])]


def method_subspace(k: KernelSpec, xs, space: DiscreteSpace,
                    rel_tol: float = DEFAULT_REL_TOL) -> Subspace:
    """Orthonormal basis for the span of the kernel sections at ``xs``."""
    sections = kernel_sections(k, xs, space)
    if not sections:
        raise ValueError("need at least one design point")
    w = orthonormalize(sections, rel_tol)
    assert w.rank <= len(sections)
    return w


def fit(k: KernelSpec, sample: LabeledSample, ridge: float = 0.0) -> KernelFit:
    """Kernel ridge regression: solve ``(G + ridge * n * I) alpha = y``.

    Singular systems (``ridge == 0`` with duplicate points or a low-rank
    kernel) get the minimum-norm least-squares solution.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    n = len(sample)
    if n == 0:
        raise ValueError("empty sample")
    g = k.matrix(sample.xs, sample.xs)
    g = (g + g.T) / 2
    if ridge > 0:
        g = g + ridge * n * np.eye(n)
    # lstsq rather than solve: numerically singular systems (tiny ridge,
    # duplicate points) still get the minimum-norm solution
    alphas = np.linalg.lstsq(g, sample.ys, rcond=None)[0]
    return KernelFit(k, sample.xs, alphas)


def mse_under_P(fitted: KernelFit, target: FuncVec) -> float:
    """Exact ``sum_x P(x) (prediction(x) - target(x))^2``."""
    pred = fitted.as_funcvec(target.space)
    _same_space(pred.space, target.space)
    return norm_sq(pred - target)


def sample_size_lower_bound(n_functions: int, epsilon: float) -> float:
    """Fewest samples any kernel method can use to reach error ``epsilon`` on all targets."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    return (1.0 - epsilon) * n_functions


def iid_design(space: DiscreteSpace, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points drawn iid from P, with replacement."""
    idx = rng.choice(space.size, size=n, replace=True, p=space.weights)
    return space.coords[idx]


def deterministic_design(space: DiscreteSpace, n: int) -> np.ndarray:
    """The first ``n`` points of ``space`` in its stored order."""
    if not 1 <= n <= space.size:
        raise ValueError(f"need 1 <= n <= {space.size}")
    return space.coords[:n]


def iid_design_sampler(k: KernelSpec, space: DiscreteSpace, n: int,
                       rel_tol: float = DEFAULT_REL_TOL) -> SubspaceSampler:
    if n < 1:
        raise ValueError("n must be >= 1")

    def draw(seed: int) -> Subspace:
        xs = iid_design(space, n, np.random.default_rng(seed))
        return method_subspace(k, xs, space, rel_tol)

    return SubspaceSampler(f"{k.name} kernel sections at {n} iid points", draw)


def labels_for(target: FuncVec, xs, eta: float = 0.0,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """Target values at ``xs``, each sign-flipped independently with probability ``eta``."""
    idx = [_locate(target.space, x) for x in np.atleast_2d(xs)]
    ys = target.values[idx].copy()
    if eta > 0:
        if rng is None:
            raise ValueError("label noise needs an rng")
        ys[rng.random(len(ys)) < eta] *= -1
    return ys
