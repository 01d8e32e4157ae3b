"""Uniform measure on {-1, 1}^d, parity characters and the Walsh transform.

Canonical enumeration: point index ``b`` has coordinate ``i`` (0-based) equal
to ``+1`` iff bit ``i`` of ``b`` is 0. A parity index is a d-bit mask whose
bit ``i`` selects coordinate ``i + 1``. With this convention
``chi_S(x_b) = (-1) ** popcount(S & b)``, so the Sylvester-ordered Hadamard
matrix is exactly the character table and Walsh coefficients come out in
mask-ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

from ._backend import core
from .hilbert import DiscreteSpace, FuncVec

__all__ = [
    "MAX_DIM",
    "MAX_FAMILY_BYTES",
    "CapacityError",
    "DomainError",
    "ParityIndex",
    "HypercubePoint",
    "WalshCoefficients",
    "hypercube_space",
    "parity",
    "all_parities",
    "k_sparse_parities",
    "k_sparse_masks",
    "fwht",
    "walsh_hadamard",
]

MAX_DIM = 20
# dense families cost N * 2^d * 8 bytes
MAX_FAMILY_BYTES = 2 ** 31


class CapacityError(ValueError):
    """Requested object exceeds the dense-representation limits."""


class DomainError(ValueError):
    """Operation needs a hypercube space."""


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= MAX_DIM:
        cost = f"{2 ** d * 8:,} bytes per function" if isinstance(d, int) and 0 < d < 64 else "n/a"
        raise CapacityError(
            f"hypercube dimension must satisfy 1 <= d <= {MAX_DIM} (got {d!r}; "
            f"dense storage needs 2^d * 8 bytes per function: {cost})")


@dataclass(frozen=True, order=True)
class ParityIndex:
    """Subset ``S`` of ``{1, ..., d}`` encoded as a d-bit mask."""

    d: int
    mask: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if not 0 <= self.mask < (1 << self.d):
            raise ValueError(f"mask {self.mask:#x} uses bits beyond d={self.d}")

    @classmethod
    def from_set(cls, d: int, subset: Iterable[int]) -> "ParityIndex":
        """Build from 1-based coordinate indices."""
        mask = 0
        for i in subset:
            if not 1 <= i <= d:
                raise ValueError(f"coordinate {i} outside 1..{d}")
            mask |= 1 << (i - 1)
        return cls(d, mask)

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.d) if self.mask >> i & 1)

    @property
    def degree(self) -> int:
        return bin(self.mask).count("1")

    def __call__(self, x) -> int:
        """Evaluate ``prod_{i in S} x_i`` at a single point."""
        x = np.asarray(x)
        if x.shape != (self.d,):
            raise ValueError(f"point has {x.shape} coordinates, expected {self.d}")
        return int(np.prod(x[[i - 1 for i in self.elements]])) if self.mask else 1


@dataclass(frozen=True)
class HypercubePoint:
    d: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.d:
            raise ValueError(f"expected {self.d} coordinates, got {len(self.coords)}")
        if any(c not in (-1, 1) for c in self.coords):
            raise ValueError("hypercube coordinates must be exactly +1 or -1")

    @classmethod
    def from_index(cls, d: int, b: int) -> "HypercubePoint":
        return cls(d, tuple(-1 if b >> i & 1 else 1 for i in range(d)))

    @classmethod
    def ones(cls, d: int) -> "HypercubePoint":
        return cls(d, (1,) * d)

    @property
    def index(self) -> int:
        return sum(1 << i for i, c in enumerate(self.coords) if c < 0)

    def flip(self, i: int) -> "HypercubePoint":
        """Negate 0-based coordinate ``i``."""
        c = list(self.coords)
        c[i] = -c[i]
        return HypercubePoint(self.d, tuple(c))


@lru_cache(maxsize=None)
def hypercube_space(d: int) -> DiscreteSpace:
    """The uniform probability space on ``{-1, 1}^d`` in canonical order."""
    _check_dim(d)
    b = np.arange(1 << d, dtype=np.int64)
    bits = (b[:, None] >> np.arange(d)) & 1
    pts = (1 - 2 * bits).astype(np.int8)
    return DiscreteSpace(pts, np.full(1 << d, 2.0 ** -d), cube_dim=d, _trusted=True)


def _require_cube(space: DiscreteSpace) -> int:
    if space.cube_dim is None:
        raise DomainError("the Walsh transform requires a hypercube_space")
    return space.cube_dim


def _parity_values(d: int, mask: int) -> np.ndarray:
    b = np.arange(1 << d, dtype=np.uint64)
    odd = np.bitwise_count(b & np.uint64(mask)) & 1
    return 1.0 - 2.0 * odd


def parity(s: ParityIndex, space: DiscreteSpace | None = None) -> FuncVec:
    """The character ``chi_S`` as a function on the d-cube."""
    if space is None:
        space = hypercube_space(s.d)
    elif space.cube_dim != s.d:
        raise DomainError(f"parity over d={s.d} does not live on {space!r}")
    return FuncVec(space, _parity_values(s.d, s.mask))


def _check_family(d: int, count: int) -> None:
    _check_dim(d)
    cost = count * (1 << d) * 8
    if cost > MAX_FAMILY_BYTES:
        raise CapacityError(
            f"{count} dense functions on the {d}-cube need {cost:,} bytes "
            f"(limit {MAX_FAMILY_BYTES:,})")


def all_parities(d: int) -> list[FuncVec]:
    """All ``2^d`` characters, mask-ascending."""
    _check_family(d, 1 << d)
    space = hypercube_space(d)
    return [parity(ParityIndex(d, s), space) for s in range(1 << d)]


def k_sparse_masks(d: int, k: int) -> list[int]:
    """Masks of popcount exactly ``k``, ascending."""
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    return sorted(sum(1 << i for i in c) for c in combinations(range(d), k))


def k_sparse_parities(d: int, k: int) -> list[FuncVec]:
    """The ``C(d, k)`` characters of degree exactly ``k``, mask-ascending."""
    masks = k_sparse_masks(d, k)
    _check_family(d, math.comb(d, k))
    space = hypercube_space(d)
    return [parity(ParityIndex(d, s), space) for s in masks]


class WalshCoefficients:
    """Walsh-Fourier coefficients of a function on the d-cube.

    ``values[S]`` is ``<chi_S, f>`` under the uniform measure. The dual group
    carries the counting measure, which is what makes :func:`fwht` an
    involution: coefficients map back to values by plain summation.
    """

    __slots__ = ("d", "values")

    def __init__(self, d: int, values):
        _check_dim(d)
        v = np.array(values, dtype=np.float64)
        if v.shape != (1 << d,):
            raise ValueError(f"expected {1 << d} coefficients, got shape {v.shape}")
        v.setflags(write=False)
        self.d = d
        self.values = v

    def __getitem__(self, s) -> float:
        if isinstance(s, ParityIndex):
            if s.d != self.d:
                raise DomainError("parity index dimension mismatch")
            s = s.mask
        return float(self.values[s])

    def energy(self) -> float:
        return math.fsum((self.values ** 2).tolist())

    def __repr__(self) -> str:
        return f"WalshCoefficients(d={self.d}, values={self.values!r})"


def walsh_hadamard(a, normalize: float = 1.0) -> np.ndarray:
    """Sylvester-ordered Hadamard transform of each row of ``a`` (times ``normalize``).

    Accepts 1-D or 2-D input; rows must have power-of-two length.
    """
    arr = np.array(a, dtype=np.float64, order="C")
    flat = arr.reshape(1, -1) if arr.ndim == 1 else arr
    core.fwht_rows(flat)
    if normalize != 1.0:
        flat *= normalize
    return flat.reshape(arr.shape)


def fwht(x):
    """Fast Walsh-Hadamard transform between values and coefficients.

    ``fwht(f)`` for a :class:`FuncVec` on a hypercube space returns
    :class:`WalshCoefficients` with entry ``S`` equal to
    ``inner_product(parity(S), f)``; ``fwht(coeffs)`` reconstructs the
    function, so ``fwht(fwht(f))`` is ``f``. O(N log N).
    """
    if isinstance(x, WalshCoefficients):
        return FuncVec(hypercube_space(x.d), walsh_hadamard(x.values))
    if isinstance(x, FuncVec):
        d = _require_cube(x.space)
        return WalshCoefficients(d, walsh_hadamard(x.values, 2.0 ** -d))
    raise DomainError(f"fwht needs a FuncVec on a hypercube or WalshCoefficients, got {type(x).__name__}")
