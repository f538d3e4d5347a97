# srlora_tools/linalg/codec.py
"""
Binary matrix record ("SRLM").

Layout: magic ``b"SRLM"``, u32 rows, u32 cols, then ``rows * cols``
little-endian float64 values in row-major order.
"""

from __future__ import annotations

import struct
from typing import Tuple

import numpy as np

from ..errors import CheckpointError
from .matrix import Matrix

MAGIC = b"SRLM"
_HEADER = struct.Struct("<4sII")


def encode_matrix(m: Matrix) -> bytes:
    if m.ndim != 2:
        raise CheckpointError(f"can only encode 2-D matrices, got shape {m.shape}")
    rows, cols = m.shape
    body = np.ascontiguousarray(m, dtype="<f8").tobytes(order="C")
    return _HEADER.pack(MAGIC, rows, cols) + body


def decode_matrix(buffer: bytes, offset: int = 0) -> Tuple[Matrix, int]:
    """Decode one record at ``offset``; return the matrix and the offset after it."""
    if len(buffer) - offset < _HEADER.size:
        raise CheckpointError(f"truncated matrix header at byte {offset}")
    magic, rows, cols = _HEADER.unpack_from(buffer, offset)
    if magic != MAGIC:
        raise CheckpointError(f"bad matrix magic {magic!r} at byte {offset}")
    start = offset + _HEADER.size
    end = start + rows * cols * 8
    if end > len(buffer):
        raise CheckpointError(
            f"truncated matrix body at byte {offset}: need {rows * cols * 8} bytes, have {len(buffer) - start}"
        )
    data = np.frombuffer(buffer, dtype="<f8", count=rows * cols, offset=start)
    return data.reshape(rows, cols).astype(np.float64, copy=True), end
