"""FP64 GEMM emulation on simulated int8 units, a blocked LU solver routing
its Schur updates through the emulated product, and adversarial test-matrix
generators with an HPL-style scaled-residual harness."""

from .errors import (
    AccumulatorOverflowError,
    InvalidDimError,
    InvalidParamsError,
    InvalidPermutationError,
    NonFiniteEntryError,
    NonPowerOfTwoScaleError,
    NonSquareError,
    OzemuError,
    ShapeMismatchError,
    SingularPivotError,
)
from .gemm import (
    FULL,
    BackendKind,
    Band,
    FlopCounter,
    Full,
    GemmBackend,
    GemmErrorProfile,
    gemm,
    gemm_error_profile,
    retained_pairs,
)
from .harness import (
    BenchRow,
    MatrixSpec,
    SearchResult,
    SolveRow,
    bench,
    default_search_bounds,
    format_table,
    search_params,
    sweep_splits,
    write_csv,
)
from .matgen import (
    DiagonalScale,
    ParaWilkParams,
    Permutation,
    apply_scaling,
    generalized_fibonacci,
    hpl_uniform,
    nnz_pattern,
    parawilk,
    parawilk_randomized,
    turing,
    turing_inverse,
    wilkinson,
)
from .mmio import read_matrix_market, write_matrix_market
from .solve import (
    PASS_THRESHOLD,
    LuFactors,
    SolveReport,
    lu_factor,
    lu_solve,
    scaled_residual,
    solve_system,
)
from .split import Orientation, ScalingMode, SliceStack, reconstruct, split_matrix

__version__ = "0.1.0"
