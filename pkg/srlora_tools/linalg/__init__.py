"""
Dense linear algebra kernels: matrix helpers, Jacobi SVD, seeded RNG, binary codec.
"""

from .matrix import (
    Matrix, as_matrix, matmul, frobenius, relative_error, identity, zeros,
    check_same_shape, validate_indices, ensure_finite,
)
from .svd import SvdFactors, svd, best_rank_k_error, truncate
from .rng import Rng, gaussian, orthonormal_columns
from .codec import encode_matrix, decode_matrix

__all__ = [
    "Matrix", "as_matrix", "matmul", "frobenius", "relative_error", "identity", "zeros",
    "check_same_shape", "validate_indices", "ensure_finite",
    "SvdFactors", "svd", "best_rank_k_error", "truncate",
    "Rng", "gaussian", "orthonormal_columns",
    "encode_matrix", "decode_matrix",
]
