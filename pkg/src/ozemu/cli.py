"""Command-line interface.

Subcommands: gen | gemm | solve | sweep-splits | search-params | bench.
Exit codes: 0 success, 1 validation failure (a failed residual under
--strict, or a solver error), 2 usage error.  All randomness is controlled
by --seed; the experiment subcommands require it.
"""

from __future__ import annotations

import argparse
import io
import sys

import numpy as np

from .errors import InvalidParamsError, OzemuError
from .gemm import FULL, Band, GemmBackend, gemm_error_profile
from .harness import (
    MatrixSpec,
    bench,
    default_lu_block,
    format_table,
    search_params,
    sweep_splits,
    write_csv,
)
from .mmio import write_matrix_market
from .solve import solve_system
from .split import ScalingMode

EPILOG = "OZEMU_THREADS caps worker concurrency for sweep and search cells."


def _parse_int_list(text: str, name: str) -> list[int]:
    """Parse '3,4,5' or 'lo:hi' or 'lo:hi:step' (inclusive) into a list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if step < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise InvalidParamsError(f"cannot parse {name} value {text!r}") from None


def _add_matrix_options(p: argparse.ArgumentParser, *, seed_required: bool) -> None:
    p.add_argument("--n", type=int, required=True, help="matrix dimension")
    p.add_argument("--matrix", default="parawilk",
                   choices=["parawilk", "uniform", "wilkinson", "turing", "identity"])
    p.add_argument("--d", type=int, help="ParaWilk/Turing subdiagonal depth")
    p.add_argument("--b", type=int, help="ParaWilk alpha-column spacing")
    p.add_argument("--alpha", type=float, help="ParaWilk upper-entry value")
    p.add_argument("--randomize", action="store_true",
                   help="fill ParaWilk zeros with 2*U(0,1)^2 draws")
    p.add_argument("--seed", type=int, required=seed_required,
                   help="RNG seed" + (" (required)" if seed_required else ""))


def _add_backend_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=["fp64", "int8"], default="fp64")
    p.add_argument("--splits", type=int, help="slice count for int8 backend")
    p.add_argument("--slice-bits", type=int, default=7)
    p.add_argument("--truncation", default=None,
                   help="'full' or 'band:T'; default band:splits+1")
    p.add_argument("--scaling", choices=["pervector", "global"], default="pervector")
    p.add_argument("--hardware-faithful", action="store_true",
                   help="reject shapes breaking exact 32-bit accumulation")


def _add_output_options(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "table"], default=default_format)


def _spec_from_args(args) -> MatrixSpec:
    spec = MatrixSpec(
        kind=args.matrix, n=args.n, depth=args.d, block=args.b,
        alpha=args.alpha, randomize=args.randomize, seed=args.seed,
    )
    if spec.needs_seed() and spec.seed is None:
        raise InvalidParamsError(f"--seed is required for {spec.describe()}")
    return spec


def _backend_from_args(args) -> GemmBackend:
    if args.backend == "fp64":
        return GemmBackend.native()
    if args.splits is None:
        raise InvalidParamsError("--splits is required with --backend int8")
    truncation = None
    if args.truncation is not None:
        text = args.truncation.lower()
        if text == "full":
            truncation = FULL
        elif text.startswith("band:"):
            truncation = Band(int(text.split(":", 1)[1]))
        else:
            raise InvalidParamsError(f"cannot parse --truncation {args.truncation!r}")
    return GemmBackend.int8(
        splits=args.splits,
        slice_bits=args.slice_bits,
        truncation=truncation,
        scaling=ScalingMode(args.scaling),
        hardware_faithful=args.hardware_faithful,
    )


def _emit(rows, args, experiment: str, config_desc: str) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        write_csv(rows, buf, experiment, config_desc)
        text = buf.getvalue()
    else:
        text = format_table(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    a = spec.build()
    comment = spec.describe()
    if args.out == "-":
        write_matrix_market(sys.stdout.buffer, a, comment=comment)
        sys.stdout.buffer.flush()
    else:
        write_matrix_market(args.out, a, comment=comment)
    return 0


def _cmd_gemm(args) -> int:
    spec = _spec_from_args(args)
    a = spec.build()
    if spec.kind == "uniform":
        b = MatrixSpec(kind="uniform", n=spec.n, seed=spec.seed + 1).build()
    else:
        b = a
    backend = _backend_from_args(args)
    profile = gemm_error_profile(backend, a, b, trials=args.trials,
                                 rng_seed=args.seed or 0)
    lines = [
        f"backend:          {profile.backend}",
        f"shape:            {profile.shape[0]}x{profile.shape[1]}x{profile.shape[2]}",
        f"trials:           {profile.trials}",
        f"max rel error:    {profile.max_rel_error:.6e}",
        f"median rel error: {profile.median_rel_error:.6e}",
        f"max abs error:    {profile.max_abs_error:.6e}",
        f"max scaled error: {profile.max_scaled_error:.6e}",
    ]
    text = "\n".join(lines) + "\n"
    if args.format == "csv":
        text = ("# ozemu csv v1 experiment=gemm\n"
                "m,n,p,backend,trials,max_rel_error,median_rel_error,"
                "max_abs_error,max_scaled_error\n"
                f"{profile.shape[0]},{profile.shape[1]},{profile.shape[2]},"
                f"{profile.backend},{profile.trials},{profile.max_rel_error:.10g},"
                f"{profile.median_rel_error:.10g},{profile.max_abs_error:.10g},"
                f"{profile.max_scaled_error:.10g}\n")
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def _cmd_solve(args) -> int:
    spec = _spec_from_args(args)
    backend = _backend_from_args(args)
    a = spec.build()
    rhs = a @ np.ones(spec.n)
    lu_block = args.lu_block if args.lu_block is not None else default_lu_block(spec.n)
    _, report = solve_system(a, rhs, lu_block=lu_block, backend=backend)
    flops = report.flops
    lines = [
        f"matrix:          {spec.describe()}",
        f"backend:         {report.backend}",
        f"lu_block:        {report.lu_block}",
        f"n:               {report.n}",
        f"scaled residual: {report.scaled_residual:.10g}",
        f"passed:          {str(report.passed).lower()}",
        f"growth:          {report.growth:.6g}",
        f"int macs:        {flops.emulated_int_ops}",
        f"f64 macs:        {flops.f64_ops}",
        f"seconds:         {report.seconds:.6f}",
    ]
    text = "\n".join(lines) + "\n"
    if args.format == "csv":
        text = ("# ozemu csv v1 experiment=solve\n"
                "matrix,backend,lu_block,n,scaled_residual,passed,growth,"
                "int_macs,f64_macs,seconds\n"
                f"{spec.describe()},{report.backend},{report.lu_block},{report.n},"
                f"{report.scaled_residual:.10g},{str(report.passed).lower()},"
                f"{report.growth:.10g},{flops.emulated_int_ops},{flops.f64_ops},"
                f"{report.seconds:.6f}\n")
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.strict and not report.passed:
        return 1
    return 0


def _cmd_sweep_splits(args) -> int:
    spec = _spec_from_args(args)
    splits_list = _parse_int_list(args.splits, "--splits")
    lu_block = args.lu_block if args.lu_block is not None else default_lu_block(spec.n)
    rows = sweep_splits(
        spec, splits_list,
        lu_block=lu_block,
        slice_bits=args.slice_bits,
        scaling=ScalingMode(args.scaling),
    )
    _emit(rows, args, "sweep-splits",
          f"matrix={spec.describe()} lu_block={lu_block}")
    if args.strict and not all(row.passed for row in rows):
        return 1
    return 0


def _cmd_search_params(args) -> int:
    ns = _parse_int_list(args.n, "--n")
    rows = [
        search_params(
            n, args.splits, args.alpha, args.seed,
            depth_max=args.d_max, block_max=args.b_max,
            lu_block=args.lu_block,
            slice_bits=args.slice_bits,
            scaling=ScalingMode(args.scaling),
        )
        for n in ns
    ]
    _emit(rows, args, "search-params",
          f"splits={args.splits} alpha={args.alpha!r} seed={args.seed}")
    return 0


def _cmd_bench(args) -> int:
    ns = _parse_int_list(args.n, "--n")
    blocks = _parse_int_list(args.lu_blocks, "--lu-blocks")
    backend = _backend_from_args(args)
    rows = bench(ns, blocks, backend, args.seed)
    _emit(rows, args, "bench", f"backend={backend.describe()} seed={args.seed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ozemu", epilog=EPILOG,
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a matrix in MatrixMarket format")
    _add_matrix_options(p, seed_required=False)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("gemm", help="profile GEMM error against the exact oracle")
    _add_matrix_options(p, seed_required=False)
    _add_backend_options(p)
    p.add_argument("--trials", type=int, default=1,
                   help="extra trials redraw uniform matrices of the same shape")
    _add_output_options(p, "table")
    p.set_defaults(func=_cmd_gemm)

    p = sub.add_parser("solve", help="solve A x = A @ ones and verify the residual")
    _add_matrix_options(p, seed_required=False)
    _add_backend_options(p)
    p.add_argument("--lu-block", type=int, default=None,
                   help="LU panel width (default min(64, n/4))")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when the residual check fails")
    _add_output_options(p, "table")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep-splits",
                       help="one solve per split count plus an fp64 baseline row")
    _add_matrix_options(p, seed_required=True)
    p.add_argument("--splits", required=True,
                   help="split counts, e.g. 3:9 or 3,5,7")
    p.add_argument("--slice-bits", type=int, default=7)
    p.add_argument("--scaling", choices=["pervector", "global"], default="pervector")
    p.add_argument("--lu-block", type=int, default=None)
    p.add_argument("--strict", action="store_true")
    _add_output_options(p, "csv")
    p.set_defaults(func=_cmd_sweep_splits)

    p = sub.add_parser("search-params",
                       help="first ParaWilk (d, b) failing the residual check")
    p.add_argument("--n", required=True, help="sizes, e.g. 256,512,1024")
    p.add_argument("--splits", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--b-max", type=int, default=None)
    p.add_argument("--slice-bits", type=int, default=7)
    p.add_argument("--scaling", choices=["pervector", "global"], default="pervector")
    p.add_argument("--lu-block", type=int, default=None)
    _add_output_options(p, "csv")
    p.set_defaults(func=_cmd_search_params)

    p = sub.add_parser("bench", help="time solves over sizes and blocking factors")
    p.add_argument("--n", required=True, help="sizes, e.g. 256:1024:256")
    p.add_argument("--lu-blocks", required=True, help="panel widths, e.g. 64,128")
    _add_backend_options(p)
    p.add_argument("--seed", type=int, required=True)
    _add_output_options(p, "csv")
    p.set_defaults(func=_cmd_bench)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidParamsError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OzemuError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
