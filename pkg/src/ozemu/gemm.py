"""General matrix multiply through a configurable backend.

The emulated path splits A row-scaled and B column-scaled, multiplies the
retained slice pairs exactly in integer arithmetic (computed on the host as
FP64 products of integer-valued matrices, which is exact while
``n * 2**(2q) < 2**53``), and accumulates the scaled partial products into
the FP64 result in a fixed order: ascending slice-index sum, then ascending
first index.  Largest contributions land first, and the order makes results
bit-reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    AccumulatorOverflowError,
    InvalidParamsError,
    NonFiniteEntryError,
    ShapeMismatchError,
)
from .oracle import abs_error_vs_exact, rel_error_vs_exact
from .split import Orientation, ScalingMode, split_matrix

__all__ = [
    "Band",
    "Full",
    "FULL",
    "BackendKind",
    "GemmBackend",
    "FlopCounter",
    "retained_pairs",
    "gemm",
    "GemmErrorProfile",
    "gemm_error_profile",
]


@dataclass(frozen=True)
class Band:
    """Keep slice products (i, j) with i + j <= limit."""

    limit: int


@dataclass(frozen=True)
class Full:
    """Keep all num_slices**2 slice products."""


FULL = Full()


class BackendKind(enum.Enum):
    NATIVE_F64 = "fp64"
    EMULATED_INT8 = "int8"


@dataclass(frozen=True)
class GemmBackend:
    """Selects native FP64 or emulated integer-sliced multiplication.

    ``hardware_faithful`` rejects shapes whose inner dimension breaks exact
    32-bit accumulation of slice products, i.e. ``n * 2**(2q) >= 2**31``,
    mirroring the int8-in/int32-accumulate contract of real tensor units.
    """

    kind: BackendKind
    splits: int = 1
    slice_bits: int = 7
    truncation: Band | Full = FULL
    scaling: ScalingMode = ScalingMode.PER_VECTOR
    hardware_faithful: bool = False

    def __post_init__(self):
        if self.kind is BackendKind.NATIVE_F64:
            return
        if self.splits < 1:
            raise InvalidParamsError("splits must be >= 1")
        if not 1 <= self.slice_bits <= 10:
            raise InvalidParamsError("slice_bits must be in 1..10")
        if isinstance(self.truncation, Band):
            if not 2 <= self.truncation.limit <= 2 * self.splits:
                raise InvalidParamsError(
                    f"band limit {self.truncation.limit} outside 2..{2 * self.splits}"
                )
        elif not isinstance(self.truncation, Full):
            raise InvalidParamsError("truncation must be Band(t) or FULL")

    @classmethod
    def native(cls) -> "GemmBackend":
        return cls(kind=BackendKind.NATIVE_F64)

    @classmethod
    def int8(
        cls,
        splits: int,
        slice_bits: int = 7,
        truncation: Band | Full | None = None,
        scaling: ScalingMode = ScalingMode.PER_VECTOR,
        hardware_faithful: bool = False,
    ) -> "GemmBackend":
        """Emulated backend; truncation defaults to Band(splits + 1)."""
        if truncation is None:
            truncation = Band(splits + 1)
        return cls(
            kind=BackendKind.EMULATED_INT8,
            splits=splits,
            slice_bits=slice_bits,
            truncation=truncation,
            scaling=scaling,
            hardware_faithful=hardware_faithful,
        )

    def describe(self) -> str:
        if self.kind is BackendKind.NATIVE_F64:
            return "fp64"
        trunc = (
            "full"
            if isinstance(self.truncation, Full)
            else f"band:{self.truncation.limit}"
        )
        tag = (
            f"int8[splits={self.splits},q={self.slice_bits},"
            f"trunc={trunc},scale={self.scaling.value}]"
        )
        if self.hardware_faithful:
            tag += "+faithful"
        return tag


@dataclass
class FlopCounter:
    """Running operation counts; counts are nominal work, additive across calls.

    ``emulated_int_ops`` and ``f64_ops`` count multiply-adds (one MAC = two
    flops in the usual convention); divisions count as single f64 ops.
    Zero-block shortcuts taken by the implementation do not reduce the
    counts, so they stay comparable to what fixed-function hardware would do.
    """

    emulated_int_ops: int = 0
    f64_ops: int = 0
    slice_products_computed: int = 0

    def add_f64(self, ops: int) -> None:
        self.f64_ops += int(ops)

    def add_emulated(self, macs: int, pairs: int) -> None:
        self.emulated_int_ops += int(macs)
        self.slice_products_computed += int(pairs)


def retained_pairs(num_slices: int, truncation: Band | Full) -> tuple[tuple[int, int], ...]:
    """Slice-index pairs kept by the truncation policy, in accumulation order."""
    if num_slices < 1:
        raise InvalidParamsError("num_slices must be >= 1")
    if isinstance(truncation, Full):
        limit = 2 * num_slices
    elif isinstance(truncation, Band):
        if not 2 <= truncation.limit <= 2 * num_slices:
            raise InvalidParamsError(
                f"band limit {truncation.limit} outside 2..{2 * num_slices}"
            )
        limit = truncation.limit
    else:
        raise InvalidParamsError("truncation must be Band(t) or FULL")
    pairs = [
        (i, j)
        for i in range(1, num_slices + 1)
        for j in range(1, num_slices + 1)
        if i + j <= limit
    ]
    pairs.sort(key=lambda p: (p[0] + p[1], p[0]))
    return tuple(pairs)


def _validate_operand(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise NonFiniteEntryError(f"{name} contains NaN or infinite entries")
    return m


def _emulated_product(backend: GemmBackend, a: np.ndarray, b: np.ndarray,
                      counter: FlopCounter | None) -> np.ndarray:
    k, q = backend.splits, backend.slice_bits
    m, inner = a.shape
    p = b.shape[1]

    # Exactness guards for the integer accumulation.
    if inner << (2 * q) >= 1 << 53:
        raise AccumulatorOverflowError(
            f"inner dimension {inner} with {q}-bit slices exceeds the exact "
            f"53-bit host accumulation bound"
        )
    if backend.hardware_faithful and inner << (2 * q) >= 1 << 31:
        raise AccumulatorOverflowError(
            f"inner dimension {inner} with {q}-bit slices breaks exact 32-bit "
            f"accumulation (hardware_faithful)"
        )

    sa = split_matrix(a, k, q, Orientation.ROW_SCALED, backend.scaling)
    sb = split_matrix(b, k, q, Orientation.COL_SCALED, backend.scaling)
    af = [s.astype(np.float64) for s in sa.slices]
    bf = [s.astype(np.float64) for s in sb.slices]
    a_used = [bool(s.any()) for s in sa.slices]
    b_used = [bool(s.any()) for s in sb.slices]
    base_exp = sa.exponents[:, None] + sb.exponents[None, :]

    pairs = retained_pairs(k, backend.truncation)
    out = np.zeros((m, p))
    for i, j in pairs:
        if not (a_used[i - 1] and b_used[j - 1]):
            continue
        prod = af[i - 1] @ bf[j - 1]   # exact integer result carried in FP64
        out += np.ldexp(prod, base_exp - (i + j) * q)

    if counter is not None:
        counter.add_emulated(macs=len(pairs) * m * inner * p, pairs=len(pairs))
        # FP64 epilogue: one scaled accumulate per retained pair plus the
        # splitting work (one scale and one subtract per slice element).
        counter.add_f64(len(pairs) * m * p + 2 * k * (m * inner + inner * p))
    return out


def gemm(
    backend: GemmBackend,
    alpha: float,
    a,
    b,
    beta: float,
    c=None,
    counter: FlopCounter | None = None,
) -> np.ndarray:
    """Return ``alpha * A @ B + beta * C`` through the selected backend.

    ``c=None`` stands for the zero matrix.  The emulated path computes A @ B
    through the slice representation and applies alpha and beta in FP64
    afterwards.  Inputs are never mutated.
    """
    a = _validate_operand(a, "a")
    b = _validate_operand(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        raise InvalidParamsError("empty inner dimension is not supported")
    m, p = a.shape[0], b.shape[1]
    if c is not None:
        c = _validate_operand(c, "c")
        if c.shape != (m, p):
            raise ShapeMismatchError(f"c has shape {c.shape}, expected {(m, p)}")

    if backend.kind is BackendKind.NATIVE_F64:
        ab = a @ b
        if counter is not None:
            counter.add_f64(m * a.shape[1] * p)
    else:
        ab = _emulated_product(backend, a, b, counter)

    out = ab
    if alpha != 1.0:
        out = alpha * ab
    if c is not None and beta != 0.0:
        out = out + beta * c
    return out


@dataclass(frozen=True)
class GemmErrorProfile:
    """Per-element error statistics of a backend against the exact product."""

    backend: str
    trials: int
    shape: tuple[int, int, int]
    max_rel_error: float
    median_rel_error: float
    max_abs_error: float
    max_scaled_error: float


def gemm_error_profile(
    backend: GemmBackend,
    a,
    b,
    trials: int = 1,
    rng_seed: int = 0,
) -> GemmErrorProfile:
    """Profile backend error against the exact oracle on small shapes.

    Trial 0 evaluates the given pair; further trials redraw U(-1/2, 1/2)
    matrices of the same shape from a generator seeded with ``rng_seed``, so
    the whole profile is deterministic.  ``max_scaled_error`` normalises each
    element by ``(|A| @ |B|)_ij``, the cancellation-free magnitude of the dot
    product, which is the meaningful accuracy scale when exact elements can
    be tiny.
    """
    a = _validate_operand(a, "a")
    b = _validate_operand(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    if a.shape[1] > 256:
        raise InvalidParamsError("inner dimension above 256: exact oracle too costly")
    if trials < 1:
        raise InvalidParamsError("trials must be >= 1")

    rng = np.random.default_rng(rng_seed)
    rel_all, abs_all, scaled_all = [], [], []
    for t in range(trials):
        if t == 0:
            at, bt = a, b
        else:
            at = rng.random(a.shape) - 0.5
            bt = rng.random(b.shape) - 0.5
        approx = gemm(backend, 1.0, at, bt, 0.0)
        rel = rel_error_vs_exact(approx, at, bt)
        errs = abs_error_vs_exact(approx, at, bt)
        scale = np.abs(at) @ np.abs(bt)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(scale > 0, errs / scale, np.where(errs > 0, np.inf, 0.0))
        rel_all.append(rel.ravel())
        abs_all.append(errs.ravel())
        scaled_all.append(scaled.ravel())

    rel = np.concatenate(rel_all)
    return GemmErrorProfile(
        backend=backend.describe(),
        trials=trials,
        shape=(a.shape[0], a.shape[1], b.shape[1]),
        max_rel_error=float(rel.max()),
        median_rel_error=float(np.median(rel)),
        max_abs_error=float(np.concatenate(abs_all).max()),
        max_scaled_error=float(np.concatenate(scaled_all).max()),
    )
