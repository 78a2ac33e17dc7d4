"""MatrixMarket array-format export and import for dense FP64 matrices."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from scipy.io import mmread, mmwrite

__all__ = ["MM_HEADER", "write_matrix_market", "read_matrix_market"]

MM_HEADER = "%%MatrixMarket matrix array real general"


def write_matrix_market(target, a, comment: str = "") -> None:
    """Write a dense matrix in MatrixMarket array format (column-major values).

    ``target`` is a path or a binary file object ('-' semantics are handled
    by the CLI).  Values are printed with enough digits to round-trip FP64
    exactly.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if isinstance(target, (str, Path)):
        with open(target, "wb") as fh:
            mmwrite(fh, a, comment=comment, field="real", precision=17,
                    symmetry="general")
    else:
        mmwrite(target, a, comment=comment, field="real", precision=17,
                symmetry="general")


def read_matrix_market(source) -> np.ndarray:
    """Read a MatrixMarket file back into a dense FP64 matrix."""
    if isinstance(source, (str, Path)):
        out = mmread(source)
    else:
        out = mmread(source)
    return np.asarray(out, dtype=np.float64)


def matrix_market_bytes(a, comment: str = "") -> bytes:
    """Serialized MatrixMarket content as bytes (handy for stdout and tests)."""
    buf = io.BytesIO()
    write_matrix_market(buf, a, comment=comment)
    return buf.getvalue()
