"""Mantissa splitting of FP64 matrices into stacks of small signed-integer slices.

A matrix is scaled row-wise (or column-wise) by a power of two so that every
scaled entry has magnitude below one, then chopped into ``num_slices``
consecutive groups of ``slice_bits`` mantissa bits.  Each group is stored as a
signed integer matrix whose entries fit the simulated 8-bit unit.  All steps
are powers-of-two scalings, truncations and exact subtractions, so the
decomposition is error-free: the dropped remainder of element ``a_ij`` is
strictly below ``2**(e - k*q)`` where ``e`` is the scaling exponent of the
element's row (or column), ``k`` the slice count and ``q`` the bits per slice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError, NonFiniteEntryError

__all__ = [
    "Orientation",
    "ScalingMode",
    "SliceStack",
    "split_matrix",
    "reconstruct",
]


class Orientation(enum.Enum):
    """Which index of the matrix carries the scaling exponents."""

    ROW_SCALED = "row"
    COL_SCALED = "col"


class ScalingMode(enum.Enum):
    """One exponent per row/column, or a single exponent for the whole matrix.

    GLOBAL reproduces the classic fixed-point failure on matrices whose rows
    span a huge dynamic range; PER_VECTOR is the standard scheme.
    """

    PER_VECTOR = "pervector"
    GLOBAL = "global"


@dataclass(frozen=True)
class SliceStack:
    """Sliced fixed-point representation of a matrix.

    ``slices[s - 1][i, j] * 2**(e - s*q)`` summed over ``s = 1..num_slices``
    reconstructs ``a_ij`` up to a remainder strictly below ``2**(e - k*q)``,
    where ``e = exponents[i]`` for ROW_SCALED stacks and ``exponents[j]`` for
    COL_SCALED ones.  Slice 1 is the most significant.  Arrays are frozen
    (non-writeable) after construction, so stacks are safe to share between
    threads.
    """

    orientation: Orientation
    num_slices: int
    slice_bits: int
    exponents: np.ndarray
    slices: tuple[np.ndarray, ...]
    shape: tuple[int, int]

    def __post_init__(self):
        if self.num_slices < 1:
            raise InvalidParamsError("num_slices must be >= 1")
        if len(self.slices) != self.num_slices:
            raise InvalidParamsError("slice count does not match num_slices")
        expected = self.shape[0] if self.orientation is Orientation.ROW_SCALED else self.shape[1]
        if self.exponents.shape != (expected,):
            raise InvalidParamsError("exponent vector length does not match shape")
        self.exponents.setflags(write=False)
        for s in self.slices:
            if s.shape != self.shape:
                raise InvalidParamsError("slice shape does not match stack shape")
            s.setflags(write=False)

    def exponent_grid(self) -> np.ndarray:
        """Exponents broadcast to the full matrix shape (as a view)."""
        if self.orientation is Orientation.ROW_SCALED:
            return self.exponents[:, None]
        return self.exponents[None, :]

    def term(self, s: int) -> np.ndarray:
        """FP64 value carried by slice ``s`` (1-based), i.e. slice_s * 2**(e - s*q)."""
        if not 1 <= s <= self.num_slices:
            raise InvalidParamsError(f"slice index {s} out of range 1..{self.num_slices}")
        return np.ldexp(
            self.slices[s - 1].astype(np.float64),
            self.exponent_grid() - s * self.slice_bits,
        )


def _validate_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidParamsError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.size == 0:
        raise InvalidParamsError("empty matrices are not supported")
    if not np.isfinite(a).all():
        raise NonFiniteEntryError("matrix contains NaN or infinite entries")
    return a


def split_matrix(
    matrix,
    num_slices: int,
    slice_bits: int = 7,
    orientation: Orientation = Orientation.ROW_SCALED,
    mode: ScalingMode = ScalingMode.PER_VECTOR,
) -> SliceStack:
    """Split a finite FP64 matrix into a :class:`SliceStack`.

    The scaling exponent of a row (or column) is the binary exponent of its
    largest-magnitude entry, so scaled entries lie in (-1, 1); an all-zero
    row has exponent 0 and all-zero slices.  Each slice takes the top
    remaining ``slice_bits`` bits of the scaled magnitude by truncation
    toward zero, carrying its own sign; the remainder propagates to the next
    slice.
    """
    a = _validate_matrix(matrix)
    if num_slices < 1:
        raise InvalidParamsError("num_slices must be >= 1")
    if not 1 <= slice_bits <= 10:
        raise InvalidParamsError("slice_bits must be in 1..10")

    if mode is ScalingMode.GLOBAL:
        size = a.shape[0] if orientation is Orientation.ROW_SCALED else a.shape[1]
        _, e_glob = np.frexp(np.abs(a).max())
        exps = np.full(size, e_glob, dtype=np.int64)
    else:
        axis = 1 if orientation is Orientation.ROW_SCALED else 0
        _, exps = np.frexp(np.abs(a).max(axis=axis))
        exps = exps.astype(np.int64)

    grid = exps[:, None] if orientation is Orientation.ROW_SCALED else exps[None, :]
    # Exact: division by a power of two; |x| < 1 afterwards.
    x = np.ldexp(a, -grid)

    dtype = np.int8 if slice_bits <= 7 else np.int16
    radix = float(1 << slice_bits)
    parts = []
    for _ in range(num_slices):
        y = x * radix          # exact power-of-two scale, |y| < 2**slice_bits
        s = np.trunc(y)
        parts.append(s.astype(dtype))
        x = y - s              # exact: fractional part of a representable value

    return SliceStack(
        orientation=orientation,
        num_slices=num_slices,
        slice_bits=slice_bits,
        exponents=exps,
        slices=tuple(parts),
        shape=a.shape,
    )


def reconstruct(stack: SliceStack) -> np.ndarray:
    """Evaluate the stack back to FP64, most significant slice first."""
    out = np.zeros(stack.shape)
    grid = stack.exponent_grid()
    for s in range(1, stack.num_slices + 1):
        out += np.ldexp(
            stack.slices[s - 1].astype(np.float64),
            grid - s * stack.slice_bits,
        )
    return out
