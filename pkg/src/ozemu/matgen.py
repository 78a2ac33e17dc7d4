"""Test-matrix generators: Wilkinson/Turing classics, the ParaWilk family,
randomized overlays, HPL-style uniform matrices, and scaling stressors.

All generators are pure functions of their parameters (and seed).  Random
fills draw one uniform per element in row-major order regardless of the
nonzero pattern, so the stream discipline is independent of the mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimError,
    InvalidParamsError,
    InvalidPermutationError,
    NonPowerOfTwoScaleError,
    ShapeMismatchError,
)

__all__ = [
    "ParaWilkParams",
    "DiagonalScale",
    "Permutation",
    "wilkinson",
    "turing",
    "turing_inverse",
    "generalized_fibonacci",
    "parawilk",
    "parawilk_randomized",
    "hpl_uniform",
    "nnz_pattern",
    "apply_scaling",
]


@dataclass(frozen=True)
class ParaWilkParams:
    """Parameters of the ParaWilk family.

    ``depth`` is the number of -1 subdiagonals (growth base), ``block`` the
    spacing of the alpha-valued upper columns (growth run length; distinct
    from the LU panel width).  ``depth`` is capped at n-1 silently; ``block``
    values of n or more simply produce no alpha columns.
    """

    n: int
    depth: int
    block: int
    alpha: float = 1.0
    randomize: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDimError("n must be >= 2")
        if self.depth < 1:
            raise InvalidParamsError("depth must be >= 1")
        if self.block < 1:
            raise InvalidParamsError("block must be >= 1")
        if not np.isfinite(self.alpha) or self.alpha == 0.0:
            raise InvalidParamsError("alpha must be finite and nonzero")
        if self.depth > self.n - 1:
            object.__setattr__(self, "depth", self.n - 1)

    def describe(self) -> str:
        tag = f"parawilk[n={self.n},d={self.depth},b={self.block},alpha={self.alpha!r}"
        if self.randomize:
            tag += f",randomized,seed={self.seed}"
        return tag + "]"


def wilkinson(n: int) -> np.ndarray:
    """Unit diagonal, -1 below the diagonal, ones filling the last column."""
    if n < 2:
        raise InvalidDimError("n must be >= 2")
    a = np.zeros((n, n))
    a[np.tril_indices(n, -1)] = -1.0
    np.fill_diagonal(a, 1.0)
    a[:, n - 1] = 1.0
    return a


def turing(n: int, depth: int) -> np.ndarray:
    """Unit lower triangular with -1 on subdiagonals 1..depth."""
    if n < 2:
        raise InvalidDimError("n must be >= 2")
    if not 1 <= depth <= n - 1:
        raise InvalidDimError(f"depth must be in 1..{n - 1}")
    i, j = np.indices((n, n))
    a = np.where((i - j >= 1) & (i - j <= depth), -1.0, 0.0)
    np.fill_diagonal(a, 1.0)
    return a


def turing_inverse(n: int, depth: int) -> np.ndarray:
    """Exact big-integer inverse of :func:`turing`, as an object array.

    Column growth follows the order-``depth`` generalized Fibonacci sequence,
    so entries overflow FP64 quickly; exact integers keep the oracle exact.
    """
    if n < 2:
        raise InvalidDimError("n must be >= 2")
    if not 1 <= depth <= n - 1:
        raise InvalidDimError(f"depth must be in 1..{n - 1}")
    inv = [[0] * n for _ in range(n)]
    for j in range(n):
        inv[j][j] = 1
        for i in range(j + 1, n):
            inv[i][j] = sum(inv[t][j] for t in range(max(i - depth, 0), i))
    return np.array(inv, dtype=object)


def generalized_fibonacci(order: int, count: int) -> list[int]:
    """First ``count`` terms of the order-``order`` sum-of-previous recurrence.

    Term 0 is 1 and each later term sums the previous min(i, order) terms,
    which makes the leading terms 1, 1, 2, 4, ..., 2**(order-2) before the
    recurrence takes over; order 2 gives the Fibonacci numbers.
    """
    if order < 1:
        raise InvalidParamsError("order must be >= 1")
    if count < 1:
        raise InvalidParamsError("count must be >= 1")
    seq = [1]
    for i in range(1, count):
        seq.append(sum(seq[max(i - order, 0):i]))
    return seq


def parawilk(params: ParaWilkParams) -> np.ndarray:
    """Deterministic ParaWilk pattern.

    Entry (i, j), 1-indexed: 1 on the diagonal, -1 on the first ``depth``
    subdiagonals, ``alpha`` strictly above the diagonal in columns j > 1 with
    (j - 1) divisible by ``block``, 0 elsewhere.
    """
    n, d, b = params.n, params.depth, params.block
    i, j = np.indices((n, n))
    a = np.where((i - j >= 1) & (i - j <= d), -1.0, 0.0)
    np.fill_diagonal(a, 1.0)
    for c in range(b, n, b):
        a[:c, c] = params.alpha
    return a


def parawilk_randomized(params: ParaWilkParams) -> np.ndarray:
    """ParaWilk pattern with the zero positions filled by 2*U(0,1)**2 draws.

    Pattern positions keep the deterministic values bit-for-bit; fills are
    positive and skewed toward larger values (mean 2/3), which avoids the
    sign cancellation a zero-centred fill would give the trailing updates.
    """
    if params.seed is None:
        raise InvalidParamsError("a seed is required for randomized generation")
    base = parawilk(params)
    rng = np.random.default_rng(params.seed)
    u = rng.random(base.shape)
    return np.where(base != 0.0, base, 2.0 * u * u)


def hpl_uniform(n: int, seed: int) -> np.ndarray:
    """n-by-n matrix of i.i.d. U(-1/2, 1/2) entries, row-major fill order."""
    if n < 1:
        raise InvalidDimError("n must be >= 1")
    if seed is None:
        raise InvalidParamsError("a seed is required")
    rng = np.random.default_rng(seed)
    return rng.random((n, n)) - 0.5


def nnz_pattern(a) -> np.ndarray:
    """Indicator matrix: 1 where the entry is nonzero, 0 elsewhere."""
    return (np.asarray(a) != 0).astype(np.uint8)


@dataclass(frozen=True)
class DiagonalScale:
    """Diagonal scaling whose entries must be signed powers of two (exact in FP64)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.entries, dtype=np.float64))
        if e.ndim != 1 or e.size == 0:
            raise InvalidParamsError("diagonal entries must form a nonempty vector")
        mant, _ = np.frexp(e)
        if not (np.isfinite(e).all() and (np.abs(mant) == 0.5).all()):
            raise NonPowerOfTwoScaleError(
                "diagonal entries must be nonzero signed powers of two"
            )
        object.__setattr__(self, "entries", e)
        e.setflags(write=False)


@dataclass(frozen=True)
class Permutation:
    """Index vector applied as a gather: result i takes input indices[i].

    Applied on the left it reorders rows; on the right it reorders columns,
    which in matrix terms is the transpose (inverse) of the same row
    permutation.
    """

    indices: np.ndarray

    def __post_init__(self):
        idx = np.atleast_1d(np.asarray(self.indices))
        if idx.ndim != 1 or idx.size == 0 or not np.issubdtype(idx.dtype, np.integer):
            raise InvalidPermutationError("indices must form a nonempty integer vector")
        if not np.array_equal(np.sort(idx), np.arange(idx.size)):
            raise InvalidPermutationError("indices are not a permutation of 0..n-1")
        object.__setattr__(self, "indices", idx)
        idx.setflags(write=False)


def apply_scaling(a, left=None, right=None) -> np.ndarray:
    """Apply power-of-two diagonal scalings or permutations on either side.

    Both transforms are exact in FP64 (barring overflow of the scaled values
    themselves), which makes them cheap, invertible stressors that widen the
    dynamic range without perturbing the data.
    """
    out = np.array(a, dtype=np.float64, copy=True)
    if out.ndim != 2:
        raise ShapeMismatchError("expected a 2-D matrix")
    if left is not None:
        if isinstance(left, DiagonalScale):
            if left.entries.size != out.shape[0]:
                raise ShapeMismatchError("left diagonal length must match row count")
            out *= left.entries[:, None]
        elif isinstance(left, Permutation):
            if left.indices.size != out.shape[0]:
                raise ShapeMismatchError("left permutation length must match row count")
            out = out[left.indices, :]
        else:
            raise InvalidParamsError("left must be DiagonalScale or Permutation")
    if right is not None:
        if isinstance(right, DiagonalScale):
            if right.entries.size != out.shape[1]:
                raise ShapeMismatchError("right diagonal length must match column count")
            out *= right.entries[None, :]
        elif isinstance(right, Permutation):
            if right.indices.size != out.shape[1]:
                raise ShapeMismatchError("right permutation length must match column count")
            out = out[:, right.indices]
        else:
            raise InvalidParamsError("right must be DiagonalScale or Permutation")
    return out
