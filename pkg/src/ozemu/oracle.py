"""Exact matrix products for small shapes, used as ground truth in error studies.

FP64 entries are dyadic rationals, so a whole matrix can be rescaled by one
power of two into arbitrary-precision integers and multiplied without any
rounding.  This path shares nothing with the emulated GEMM it is used to
check.  Cost is cubic in pure Python; keep the inner dimension small
(a few hundred at most).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import ShapeMismatchError

__all__ = [
    "exact_gemm_scaled",
    "exact_gemm_fractions",
    "exact_gemm_float",
    "abs_error_vs_exact",
    "rel_error_vs_exact",
]


def _scaled_ints(m: np.ndarray) -> tuple[list[list[int]], int]:
    """Rewrite ``m`` as an integer matrix times a single power of two."""
    mant, exp = np.frexp(np.asarray(m, dtype=np.float64))
    sig = (mant * 2.0**53).astype(np.int64)   # exact: mant has <= 53 bits
    shift = exp.astype(np.int64) - 53
    nz = sig != 0
    if not nz.any():
        return [[0] * m.shape[1] for _ in range(m.shape[0])], 0
    base = int(shift[nz].min())
    rows = []
    for i in range(m.shape[0]):
        rows.append(
            [int(s) << int(r - base) if s else 0 for s, r in zip(sig[i], shift[i])]
        )
    return rows, base


def exact_gemm_scaled(a, b) -> tuple[list[list[int]], int]:
    """Exact product A @ B as ``(ints, s)`` with ``C == ints * 2**s`` elementwise."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    ai, sa = _scaled_ints(a)
    bi, sb = _scaled_ints(b)
    bt = list(zip(*bi))
    out = [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in ai]
    return out, sa + sb


def _to_fraction(num: int, scale: int) -> Fraction:
    if scale >= 0:
        return Fraction(num * (1 << scale))
    return Fraction(num, 1 << -scale)


def exact_gemm_fractions(a, b) -> list[list[Fraction]]:
    """Exact product A @ B as a nested list of Fractions."""
    ints, scale = exact_gemm_scaled(a, b)
    return [[_to_fraction(v, scale) for v in row] for row in ints]


def exact_gemm_float(a, b) -> np.ndarray:
    """Exact product rounded once to FP64 (correctly rounded per element)."""
    ints, scale = exact_gemm_scaled(a, b)
    out = np.empty((len(ints), len(ints[0])))
    for i, row in enumerate(ints):
        for j, v in enumerate(row):
            out[i, j] = float(_to_fraction(v, scale))
    return out


def abs_error_vs_exact(approx, a, b) -> np.ndarray:
    """|approx - A@B| per element, with the difference taken exactly."""
    approx = np.asarray(approx, dtype=np.float64)
    ints, scale = exact_gemm_scaled(a, b)
    if approx.shape != (len(ints), len(ints[0])):
        raise ShapeMismatchError("approx shape does not match the product shape")
    out = np.empty_like(approx)
    for i, row in enumerate(ints):
        for j, v in enumerate(row):
            diff = Fraction(float(approx[i, j])) - _to_fraction(v, scale)
            out[i, j] = float(abs(diff))
    return out


def rel_error_vs_exact(approx, a, b) -> np.ndarray:
    """|approx - A@B| / |A@B| per element; 0/0 counts as 0, x/0 as inf."""
    approx = np.asarray(approx, dtype=np.float64)
    ints, scale = exact_gemm_scaled(a, b)
    if approx.shape != (len(ints), len(ints[0])):
        raise ShapeMismatchError("approx shape does not match the product shape")
    out = np.empty_like(approx)
    for i, row in enumerate(ints):
        for j, v in enumerate(row):
            exact = _to_fraction(v, scale)
            diff = abs(Fraction(float(approx[i, j])) - exact)
            if exact == 0:
                out[i, j] = 0.0 if diff == 0 else np.inf
            else:
                out[i, j] = float(diff / abs(exact))
    return out
