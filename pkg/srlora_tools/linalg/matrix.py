# srlora_tools/linalg/matrix.py
"""
Dense real-matrix helpers.

A ``Matrix`` is a 2-D, C-contiguous ``float64`` ndarray. Every public
operation checks shapes up front and rejects non-finite results.
"""

from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np
import numpy.typing as npt

from ..errors import ShapeError, ValidationError

Matrix = npt.NDArray[np.float64]


def as_matrix(data: npt.ArrayLike, name: str = "matrix") -> Matrix:
    """Coerce ``data`` to a finite 2-D float64 matrix (copying)."""
    arr = np.array(data, dtype=np.float64, order="C", copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected 2-D data, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name}: rows and cols must be positive, got {arr.shape}")
    ensure_finite(arr, name)
    return arr


def ensure_finite(m: np.ndarray, name: str = "matrix") -> None:
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: contains NaN or Inf entries")


def shape_of(m: Matrix) -> Tuple[int, int]:
    return int(m.shape[0]), int(m.shape[1])


def check_same_shape(operation: str, a: Matrix, b: Matrix) -> None:
    if a.shape != b.shape:
        raise ShapeError(operation, shape_of(a), shape_of(b))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product ``a @ b``; rejects mismatched inner dimensions."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", tuple(a.shape), tuple(b.shape))
    out = a @ b
    ensure_finite(out, "matmul result")
    return out


def frobenius(m: Matrix) -> float:
    return float(np.linalg.norm(m, ord="fro"))


def relative_error(actual: Matrix, expected: Matrix) -> float:
    """``‖actual − expected‖_F / ‖expected‖_F`` (absolute when ``expected`` is zero)."""
    check_same_shape("relative_error", actual, expected)
    denom = frobenius(expected)
    diff = frobenius(actual - expected)
    return diff / denom if denom > 0.0 else diff


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.float64)


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.float64)


def validate_indices(indices: Iterable[int], upper: int, what: str = "slot") -> Tuple[int, ...]:
    """Return ``indices`` sorted and de-duplicated; reject anything outside ``[0, upper)``."""
    out = tuple(sorted({int(i) for i in indices}))
    for i in out:
        if i < 0 or i >= upper:
            raise ValidationError(f"{what} index {i} out of range [0, {upper})")
    return out
