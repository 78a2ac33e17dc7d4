"""Desk-scale experiment drivers: residual-vs-splits sweeps, first-failing
parameter searches, blocking-factor benchmarks, and their CSV/table output.

Rows are deterministic for a given config and seed; only the timing columns
(``seconds`` and the rates derived from it) vary between runs.  The
``OZEMU_THREADS`` environment variable caps worker concurrency for sweep and
search cells; results are emitted in scan order regardless of worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError, OzemuError
from .gemm import GemmBackend, retained_pairs
from .matgen import ParaWilkParams, hpl_uniform, parawilk, parawilk_randomized, turing, wilkinson
from .solve import SolveReport, solve_system
from .split import ScalingMode

__all__ = [
    "MatrixSpec",
    "SolveRow",
    "SearchResult",
    "BenchRow",
    "default_lu_block",
    "sweep_splits",
    "search_params",
    "default_search_bounds",
    "bench",
    "write_csv",
    "format_table",
]

CSV_SCHEMA_VERSION = "ozemu csv v1"


def default_lu_block(n: int) -> int:
    """Default LU panel width: n/4 capped at 64, at least 1.

    Keeps at least three quarters of the cubic work in the Schur updates, so
    the configured GEMM backend actually sees the matrix at small sizes too.
    """
    return max(1, min(64, n // 4))


def _resolve_lu_block(lu_block: int | None, n: int) -> int:
    if lu_block is None:
        return default_lu_block(n)
    return max(1, min(lu_block, n))


def _worker_count() -> int:
    try:
        w = int(os.environ.get("OZEMU_THREADS", "1"))
    except ValueError:
        w = 1
    return max(1, w)


def _map_in_order(fn, items):
    """Apply fn over items, preserving order; parallel when OZEMU_THREADS > 1."""
    workers = _worker_count()
    if workers == 1:
        for item in items:
            yield fn(item)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, items)


@dataclass(frozen=True)
class MatrixSpec:
    """Named test-matrix instance used by the CLI and experiment drivers."""

    kind: str
    n: int
    depth: int | None = None
    block: int | None = None
    alpha: float | None = None
    randomize: bool = False
    seed: int | None = None

    def needs_seed(self) -> bool:
        return self.kind == "uniform" or (self.kind == "parawilk" and self.randomize)

    def build(self) -> np.ndarray:
        if self.kind == "parawilk":
            if self.depth is None or self.block is None or self.alpha is None:
                raise InvalidParamsError("parawilk requires depth, block and alpha")
            params = ParaWilkParams(self.n, self.depth, self.block, self.alpha,
                                    randomize=self.randomize, seed=self.seed)
            return parawilk_randomized(params) if self.randomize else parawilk(params)
        if self.kind == "uniform":
            if self.seed is None:
                raise InvalidParamsError("uniform matrices require a seed")
            return hpl_uniform(self.n, self.seed)
        if self.kind == "wilkinson":
            return wilkinson(self.n)
        if self.kind == "turing":
            if self.depth is None:
                raise InvalidParamsError("turing requires depth")
            return turing(self.n, self.depth)
        if self.kind == "identity":
            return np.eye(self.n)
        raise InvalidParamsError(f"unknown matrix kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "parawilk":
            tag = f"parawilk[n={self.n},d={self.depth},b={self.block},alpha={self.alpha!r}"
            if self.randomize:
                tag += f",randomized,seed={self.seed}"
            return tag + "]"
        if self.kind == "uniform":
            return f"uniform[n={self.n},seed={self.seed}]"
        if self.kind == "turing":
            return f"turing[n={self.n},d={self.depth}]"
        return f"{self.kind}[n={self.n}]"


def _solve_once(a: np.ndarray, backend: GemmBackend, lu_block: int) -> SolveReport:
    """Solve A x = b with b = A @ ones (native FP64 rhs) and report."""
    rhs = a @ np.ones(a.shape[0])
    _, report = solve_system(a, rhs, lu_block=lu_block, backend=backend)
    return report


@dataclass
class SolveRow:
    """One sweep row; ``splits`` is None for the native FP64 baseline."""

    splits: int | None
    scaled_residual: float
    passed: bool
    int_macs: int
    f64_macs: int
    slice_pairs: int
    seconds: float
    backend: str
    error: str = ""

    CSV_FIELDS = ("splits", "scaled_residual", "passed", "int_macs", "f64_macs",
                  "slice_pairs", "seconds", "backend", "error")

    def to_csv_dict(self) -> dict:
        return {
            "splits": "fp64" if self.splits is None else str(self.splits),
            "scaled_residual": _fmt_residual(self.scaled_residual),
            "passed": _fmt_bool(self.passed),
            "int_macs": str(self.int_macs),
            "f64_macs": str(self.f64_macs),
            "slice_pairs": str(self.slice_pairs),
            "seconds": _fmt_seconds(self.seconds),
            "backend": self.backend,
            "error": self.error,
        }


def _row_from_report(splits: int | None, report: SolveReport) -> SolveRow:
    flops = report.flops
    return SolveRow(
        splits=splits,
        scaled_residual=report.scaled_residual,
        passed=report.passed,
        int_macs=flops.emulated_int_ops if flops else 0,
        f64_macs=flops.f64_ops if flops else 0,
        slice_pairs=flops.slice_products_computed if flops else 0,
        seconds=report.seconds or 0.0,
        backend=report.backend,
    )


def sweep_splits(
    spec: MatrixSpec,
    splits_list,
    *,
    lu_block: int | None = None,
    slice_bits: int = 7,
    scaling: ScalingMode = ScalingMode.PER_VECTOR,
    include_baseline: bool = True,
) -> list[SolveRow]:
    """One solve per split count on a single matrix instance.

    The matrix is built once, so every row sees identical data.  Solver
    errors are recorded in the row rather than aborting the sweep.  The
    native FP64 baseline is appended as the final row.
    """
    splits_list = list(splits_list)
    if not splits_list:
        raise InvalidParamsError("splits range is empty")
    a = spec.build()
    nb = _resolve_lu_block(lu_block, spec.n)

    def run(splits: int | None) -> SolveRow:
        backend = (GemmBackend.native() if splits is None
                   else GemmBackend.int8(splits, slice_bits, scaling=scaling))
        try:
            report = _solve_once(a, backend, nb)
        except OzemuError as exc:
            return SolveRow(splits=splits, scaled_residual=float("nan"),
                            passed=False, int_macs=0, f64_macs=0, slice_pairs=0,
                            seconds=0.0, backend=backend.describe(),
                            error=f"{type(exc).__name__}: {exc}")
        return _row_from_report(splits, report)

    jobs: list[int | None] = list(splits_list)
    if include_baseline:
        jobs.append(None)
    return list(_map_in_order(run, jobs))


@dataclass
class SearchResult:
    """First (depth, block) cell in scan order whose solve fails the residual check.

    ``exhausted`` is set when no cell in the scanned range fails; the depth,
    block and residual fields are then None.
    """

    n: int
    splits: int
    depth: int | None
    block: int | None
    scaled_residual: float | None
    cells_scanned: int
    exhausted: bool
    backend: str

    CSV_FIELDS = ("n", "splits", "d", "b", "scaled_residual", "cells_scanned",
                  "exhausted", "backend")

    def to_csv_dict(self) -> dict:
        return {
            "n": str(self.n),
            "splits": str(self.splits),
            "d": "" if self.depth is None else str(self.depth),
            "b": "" if self.block is None else str(self.block),
            "scaled_residual": (
                "" if self.scaled_residual is None
                else _fmt_residual(self.scaled_residual)
            ),
            "cells_scanned": str(self.cells_scanned),
            "exhausted": _fmt_bool(self.exhausted),
            "backend": self.backend,
        }


def default_search_bounds(n: int) -> tuple[int, int]:
    """Scan bounds wide enough to bracket the failing parameters at desk scale."""
    return min(20, n // 8), min(32, n // 4)


def search_params(
    n: int,
    splits: int,
    alpha: float,
    seed: int,
    *,
    depth_max: int | None = None,
    block_max: int | None = None,
    lu_block: int | None = None,
    slice_bits: int = 7,
    scaling: ScalingMode = ScalingMode.PER_VECTOR,
) -> SearchResult:
    """Scan depth ascending, then block ascending within each depth, until a
    randomized ParaWilk instance fails the scaled-residual check.

    A cell fails when the solve does not pass (residual >= 16, or a
    non-finite residual, or a solver error such as an exactly zero pivot
    produced by the emulation).  Every cell reuses the same base seed, so the
    scan is deterministic.
    """
    d_default, b_default = default_search_bounds(n)
    depth_max = d_default if depth_max is None else depth_max
    block_max = b_default if block_max is None else block_max
    if depth_max < 1 or block_max < 2:
        raise InvalidParamsError("search bounds too small")
    backend = GemmBackend.int8(splits, slice_bits, scaling=scaling)
    nb = _resolve_lu_block(lu_block, n)
    cells = [(d, b) for d in range(1, depth_max + 1) for b in range(2, block_max + 1)]

    def run(cell: tuple[int, int]) -> tuple[bool, float]:
        d, b = cell
        params = ParaWilkParams(n, d, b, alpha, randomize=True, seed=seed)
        a = parawilk_randomized(params)
        try:
            report = _solve_once(a, backend, nb)
        except OzemuError:
            return True, float("inf")
        return (not report.passed), report.scaled_residual

    scanned = 0
    workers = _worker_count()
    for start in range(0, len(cells), max(workers, 1)):
        chunk = cells[start:start + max(workers, 1)]
        for cell, (failed, residual) in zip(chunk, _map_in_order(run, chunk)):
            scanned += 1
            if failed:
                return SearchResult(
                    n=n, splits=splits, depth=cell[0], block=cell[1],
                    scaled_residual=residual, cells_scanned=scanned,
                    exhausted=False, backend=backend.describe(),
                )
    return SearchResult(
        n=n, splits=splits, depth=None, block=None, scaled_residual=None,
        cells_scanned=scanned, exhausted=True, backend=backend.describe(),
    )


@dataclass
class BenchRow:
    """Timing plus analytic cost model for one (n, lu_block, backend) cell.

    ``model_ops`` is the backend-comparable operation count for the cubic
    work: retained slice pairs times n**3 integer MACs for the emulated
    backend, 2*n**3/3 FP64 flops for the native one.  ``model_gops`` divides
    it by the measured wall time.
    """

    n: int
    lu_block: int
    backend: str
    seconds: float
    f64_macs: int
    int_macs: int
    slice_pairs: int
    model_ops: int
    model_gops: float
    scaled_residual: float
    skipped: str = ""

    CSV_FIELDS = ("n", "lu_block", "backend", "seconds", "f64_macs", "int_macs",
                  "slice_pairs", "model_ops", "model_gops", "scaled_residual",
                  "skipped")

    def to_csv_dict(self) -> dict:
        return {
            "n": str(self.n),
            "lu_block": str(self.lu_block),
            "backend": self.backend,
            "seconds": _fmt_seconds(self.seconds),
            "f64_macs": str(self.f64_macs),
            "int_macs": str(self.int_macs),
            "slice_pairs": str(self.slice_pairs),
            "model_ops": str(self.model_ops),
            "model_gops": f"{self.model_gops:.3f}",
            "scaled_residual": _fmt_residual(self.scaled_residual),
            "skipped": self.skipped,
        }


def bench(
    n_values,
    lu_blocks,
    backend: GemmBackend,
    seed: int,
) -> list[BenchRow]:
    """Time uniform-matrix solves over a grid of sizes and blocking factors.

    Cells where the blocking factor does not divide n are reported as
    skipped rather than silently dropped.
    """
    rows = []
    for n in n_values:
        a = hpl_uniform(n, seed)
        for nb in lu_blocks:
            if nb > n or n % nb != 0:
                rows.append(BenchRow(
                    n=n, lu_block=nb, backend=backend.describe(), seconds=0.0,
                    f64_macs=0, int_macs=0, slice_pairs=0, model_ops=0,
                    model_gops=0.0, scaled_residual=float("nan"),
                    skipped=f"lu_block {nb} does not divide n {n}",
                ))
                continue
            report = _solve_once(a, backend, nb)
            if backend.kind.value == "int8":
                pairs = len(retained_pairs(backend.splits, backend.truncation))
                model = pairs * n**3
            else:
                model = 2 * n**3 // 3
            flops = report.flops
            seconds = report.seconds or 0.0
            rows.append(BenchRow(
                n=n, lu_block=nb, backend=backend.describe(), seconds=seconds,
                f64_macs=flops.f64_ops if flops else 0,
                int_macs=flops.emulated_int_ops if flops else 0,
                slice_pairs=flops.slice_products_computed if flops else 0,
                model_ops=model,
                model_gops=(model / seconds / 1e9) if seconds > 0 else 0.0,
                scaled_residual=report.scaled_residual,
            ))
    return rows


def _fmt_residual(x: float) -> str:
    return f"{x:.10g}"


def _fmt_seconds(x: float) -> str:
    return f"{x:.6f}"


def _fmt_bool(x: bool) -> str:
    return "true" if x else "false"


def write_csv(rows, stream, experiment: str, config_desc: str = "") -> None:
    """Emit rows as CSV with the schema version in a leading comment line."""
    header = f"# {CSV_SCHEMA_VERSION} experiment={experiment}"
    if config_desc:
        header += f" {config_desc}"
    stream.write(header + "\n")
    if not rows:
        return
    fields = type(rows[0]).CSV_FIELDS
    stream.write(",".join(fields) + "\n")
    for row in rows:
        d = row.to_csv_dict()
        stream.write(",".join(d[f] for f in fields) + "\n")


def format_table(rows) -> str:
    """Plain-text aligned table of the same values as the CSV output."""
    if not rows:
        return "(no rows)\n"
    fields = type(rows[0]).CSV_FIELDS
    dicts = [row.to_csv_dict() for row in rows]
    widths = {f: max(len(f), *(len(d[f]) for d in dicts)) for f in fields}
    lines = ["  ".join(f.ljust(widths[f]) for f in fields)]
    for d in dicts:
        lines.append("  ".join(d[f].ljust(widths[f]) for f in fields))
    return "\n".join(lines) + "\n"
