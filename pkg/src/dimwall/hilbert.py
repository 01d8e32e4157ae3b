"""L^2(P) geometry over finite probability spaces.

Functions are stored as value vectors on a :class:`DiscreteSpace`; every
inner product is the weighted sum ``sum_x P(x) f(x) g(x)``, computed exactly
enough (compensated summation) that identities can be tested at 1e-12.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ._backend import core

__all__ = [
    "DiscreteSpace",
    "FuncVec",
    "Subspace",
    "SpaceMismatchError",
    "NumericalConsistencyError",
    "inner_product",
    "norm_sq",
    "gram",
    "orthonormalize",
    "residual_sq",
    "residuals_sq",
    "coefficients",
]

WEIGHT_SUM_TOL = 1e-12
ORTHONORMAL_TOL = 1e-9
RESIDUAL_NEG_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10


class SpaceMismatchError(ValueError):
    """Two objects live on different discrete spaces."""


class NumericalConsistencyError(ArithmeticError):
    """A computed quantity violates an identity it must satisfy."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class DiscreteSpace:
    """Finite point set carrying strictly positive probability weights.

    Parameters
    ----------
    points : array_like
        Either a 1-D sequence of point identifiers or an ``(m, dim)`` array
        whose rows are points. Identifiers must be unique.
    weights : array_like, optional
        Probability of each point. Uniform when omitted.
    cube_dim : int, optional
        Set by :func:`dimwall.boolean.hypercube_space`; marks the space as the
        uniform hypercube in canonical order, which enables the Walsh
        transform and arithmetic point lookup.
    """

    __slots__ = ("points", "weights", "cube_dim", "_index")

    def __init__(self, points, weights=None, *, cube_dim: int | None = None,
                 _trusted: bool = False):
        pts = np.array(points)
        if pts.ndim not in (1, 2) or pts.shape[0] == 0:
            raise ValueError("points must be a nonempty 1-D or 2-D array")
        m = pts.shape[0]
        if weights is None:
            w = np.full(m, 1.0 / m)
        else:
            w = np.array(weights, dtype=np.float64)
        if w.shape != (m,):
            raise ValueError(f"expected {m} weights, got shape {w.shape}")
        if not _trusted:
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("weights must be finite and strictly positive")
            total = math.fsum(w.tolist())
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError(f"weights sum to {total!r}, not 1")
            n_unique = len(np.unique(pts, axis=0)) if pts.ndim == 2 else len(set(pts.tolist()))
            if n_unique != m:
                raise ValueError("point identifiers must be unique")
        self.points = _readonly(pts)
        self.weights = _readonly(w)
        self.cube_dim = cube_dim
        self._index = None

    @classmethod
    def uniform(cls, points) -> "DiscreteSpace":
        return cls(points)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def coords(self) -> np.ndarray:
        """Points as an ``(m, dim)`` float array (for kernel evaluation)."""
        pts = self.points
        if pts.ndim == 1:
            pts = pts[:, None]
        return pts.astype(np.float64)

    def index_of(self, point) -> int:
        """Position of ``point`` in this space; ``KeyError`` if absent."""
        if self.cube_dim is not None:
            x = np.asarray(point)
            if x.shape != (self.cube_dim,) or not np.all(np.abs(x) == 1):
                raise KeyError(f"{point!r} is not a point of the {self.cube_dim}-cube")
            bits = (x < 0).astype(np.int64)
            return int(bits @ (1 << np.arange(self.cube_dim, dtype=np.int64)))
        if self._index is None:
            rows = self.points.tolist()
            self._index = {_key(r): i for i, r in enumerate(rows)}
        p = np.asarray(point)
        try:
            if self.points.ndim == 1:
                key = p.reshape(()).item()
            else:
                key = tuple(p.tolist())
            return self._index[key]
        except (KeyError, TypeError, ValueError):
            raise KeyError(f"{point!r} is not a point of this space") from None

    def __contains__(self, point) -> bool:
        try:
            self.index_of(point)
        except KeyError:
            return False
        return True

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, DiscreteSpace):
            return NotImplemented
        return (self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.points.shape, self.cube_dim))

    def __repr__(self) -> str:
        if self.cube_dim is not None:
            return f"DiscreteSpace(hypercube d={self.cube_dim})"
        return f"DiscreteSpace(size={self.size})"


def _key(row):
    return tuple(row) if isinstance(row, list) else row


class FuncVec:
    """A real function on a :class:`DiscreteSpace`, stored by value."""

    __slots__ = ("space", "values")

    def __init__(self, space: DiscreteSpace, values):
        v = np.array(values, dtype=np.float64)
        if v.shape != (space.size,):
            raise ValueError(f"expected {space.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("function values must be finite")
        self.space = space
        self.values = _readonly(v)

    @classmethod
    def constant(cls, space: DiscreteSpace, c: float = 1.0) -> "FuncVec":
        return cls(space, np.full(space.size, float(c)))

    @classmethod
    def zero(cls, space: DiscreteSpace) -> "FuncVec":
        return cls.constant(space, 0.0)

    def _check(self, other: "FuncVec") -> None:
        _same_space(self.space, other.space)

    def __add__(self, other: "FuncVec") -> "FuncVec":
        self._check(other)
        return FuncVec(self.space, self.values + other.values)

    def __sub__(self, other: "FuncVec") -> "FuncVec":
        self._check(other)
        return FuncVec(self.space, self.values - other.values)

    def __mul__(self, a: float) -> "FuncVec":
        return FuncVec(self.space, self.values * float(a))

    __rmul__ = __mul__

    def __truediv__(self, a: float) -> "FuncVec":
        return FuncVec(self.space, self.values / float(a))

    def __neg__(self) -> "FuncVec":
        return FuncVec(self.space, -self.values)

    def __repr__(self) -> str:
        return f"FuncVec({self.space!r}, values={self.values!r})"


def _same_space(a: DiscreteSpace, b: DiscreteSpace) -> None:
    if a is not b and a != b:
        raise SpaceMismatchError(f"functions live on different spaces: {a!r} vs {b!r}")


def _common_space(fs: Sequence[FuncVec]) -> DiscreteSpace:
    space = fs[0].space
    for f in fs[1:]:
        _same_space(space, f.space)
    return space


def _stack(fs: Sequence[FuncVec]) -> np.ndarray:
    return np.ascontiguousarray(np.stack([f.values for f in fs]))


class Subspace:
    """Span of an orthonormal (in L^2(P)) list of functions.

    ``vectors`` holds the basis as rows; the orthonormality invariant is
    checked on construction.
    """

    __slots__ = ("space", "vectors")

    def __init__(self, space: DiscreteSpace, vectors, *, check: bool = True):
        v = np.array(vectors, dtype=np.float64).reshape(-1, space.size)
        if check and v.shape[0]:
            g = (v * space.weights) @ v.T
            err = np.abs(g - np.eye(v.shape[0])).max()
            if err > ORTHONORMAL_TOL:
                raise NumericalConsistencyError(
                    f"basis is not orthonormal (max Gram deviation {err:.3e})")
        self.space = space
        self.vectors = _readonly(np.ascontiguousarray(v))

    @classmethod
    def empty(cls, space: DiscreteSpace) -> "Subspace":
        return cls(space, np.zeros((0, space.size)))

    @classmethod
    def from_basis(cls, basis: Sequence[FuncVec]) -> "Subspace":
        """Wrap functions already known to be orthonormal."""
        space = _common_space(basis)
        return cls(space, _stack(basis))

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @property
    def basis(self) -> tuple[FuncVec, ...]:
        return tuple(FuncVec(self.space, row) for row in self.vectors)

    def project(self, f: FuncVec) -> FuncVec:
        """Orthogonal projection of ``f`` onto the subspace."""
        _same_space(self.space, f.space)
        c = self.vectors @ (self.space.weights * f.values)
        return FuncVec(self.space, c @ self.vectors if self.rank else np.zeros(self.space.size))

    def __repr__(self) -> str:
        return f"Subspace({self.space!r}, rank={self.rank})"


def inner_product(f: FuncVec, g: FuncVec) -> float:
    """Return ``sum_x P(x) f(x) g(x)`` with compensated summation."""
    _same_space(f.space, g.space)
    return float(core.weighted_dot(f.space.weights, f.values, g.values))


def norm_sq(f: FuncVec) -> float:
    return inner_product(f, f)


def gram(fs: Sequence[FuncVec]) -> np.ndarray:
    """Matrix of pairwise inner products (symmetric by construction)."""
    if not fs:
        return np.zeros((0, 0))
    space = _common_space(fs)
    a = _stack(fs)
    g = (a * space.weights) @ a.T
    return (g + g.T) / 2


def coefficients(fs: Sequence[FuncVec], w: Subspace) -> np.ndarray:
    """Matrix ``C[i, k] = <u_k, fs[i]>`` against the orthonormal basis of ``w``."""
    space = _common_space(list(fs))
    _same_space(space, w.space)
    a = _stack(fs)
    return (a * space.weights) @ w.vectors.T


def orthonormalize(fs: Sequence[FuncVec], rel_tol: float = DEFAULT_REL_TOL) -> Subspace:
    """Orthonormal basis of ``span(fs)`` by modified Gram-Schmidt.

    Each vector is orthogonalized twice against the basis built so far; a
    direction is dropped when its residual norm is at most ``rel_tol`` times
    the largest input norm. All-zero input yields the rank-0 subspace.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    if not fs:
        raise ValueError("need at least one function")
    space = _common_space(fs)
    q, rank = core.mgs(_stack(fs), space.weights, float(rel_tol))
    return Subspace(space, np.asarray(q)[:rank])


def residuals_sq(fs: Sequence[FuncVec], w: Subspace) -> np.ndarray:
    """Vectorized :func:`residual_sq` over a list of functions."""
    space = _common_space(list(fs))
    _same_space(space, w.space)
    a = _stack(fs)
    norms = np.einsum("ij,ij,j->i", a, a, space.weights)
    if w.rank:
        c = (a * space.weights) @ w.vectors.T
        res = norms - np.einsum("ij,ij->i", c, c)
    else:
        res = norms
    floor = -RESIDUAL_NEG_TOL * np.maximum(1.0, norms)
    if np.any(res < floor):
        i = int(np.argmin(res - floor))
        raise NumericalConsistencyError(
            f"negative residual {res[i]:.3e} for function {i}: basis not orthonormal")
    return np.clip(res, 0.0, norms)


def residual_sq(f: FuncVec, w: Subspace) -> float:
    """Squared distance from ``f`` to ``w``: ``||f||^2 - sum_k <u_k, f>^2``."""
    _same_space(f.space, w.space)
    ns = norm_sq(f)
    if w.rank:
        c = w.vectors @ (f.space.weights * f.values)
        res = ns - math.fsum((c * c).tolist())
    else:
        res = ns
    if res < -RESIDUAL_NEG_TOL * max(1.0, ns):
        raise NumericalConsistencyError(
            f"negative residual {res:.3e}: basis not orthonormal")
    return min(max(res, 0.0), ns)


def as_funcvecs(space: DiscreteSpace, rows: Iterable) -> list[FuncVec]:
    return [FuncVec(space, r) for r in rows]
