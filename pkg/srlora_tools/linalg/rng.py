# srlora_tools/linalg/rng.py
"""
Seeded random streams.

``Rng`` wraps a PCG64 ``numpy.random.Generator``. Independent streams are
derived from ``(seed, *keys)`` through ``SeedSequence`` so that consumers
(weight init, data, batching) never share draws.
"""

from __future__ import annotations

from typing import Any, Dict

import numpy as np

from ..errors import ValidationError
from .matrix import Matrix

_SEED_MASK = (1 << 64) - 1


class Rng:
    """Deterministic random stream keyed by a 64-bit seed."""

    def __init__(self, seed: int, *keys: int):
        if seed < 0 or seed > _SEED_MASK:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.keys = tuple(int(k) for k in keys)
        self._generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *self.keys])))

    def derive(self, *keys: int) -> "Rng":
        """Independent child stream; does not advance this one."""
        return Rng(self.seed, *self.keys, *keys)

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def normal(self, rows: int, cols: int, mean: float = 0.0, std: float = 1.0) -> Matrix:
        return self._generator.normal(loc=mean, scale=std, size=(rows, cols)).astype(np.float64)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def get_state(self) -> Dict[str, Any]:
        return {"seed": self.seed, "keys": list(self.keys), "bit_generator": self._generator.bit_generator.state}

    def set_state(self, state: Dict[str, Any]) -> None:
        self._generator.bit_generator.state = state["bit_generator"]

    @classmethod
    def from_state(cls, state: Dict[str, Any]) -> "Rng":
        rng = cls(int(state["seed"]), *[int(k) for k in state.get("keys", [])])
        rng.set_state(state)
        return rng


def gaussian(rng: Rng, rows: int, cols: int, mean: float = 0.0, std: float = 1.0) -> Matrix:
    """i.i.d. normal matrix; ``std == 0`` yields the constant ``mean`` matrix."""
    if std < 0:
        raise ValidationError(f"gaussian: std must be >= 0, got {std}")
    if rows < 1 or cols < 1:
        raise ValidationError(f"gaussian: rows and cols must be positive, got {rows}x{cols}")
    if std == 0:
        return np.full((rows, cols), float(mean), dtype=np.float64)
    return rng.normal(rows, cols, mean, std)


def orthonormal_columns(rng: Rng, rows: int, cols: int) -> Matrix:
    """Random ``rows x cols`` matrix with orthonormal columns (QR of a Gaussian)."""
    if cols > rows:
        raise ValidationError(f"orthonormal_columns: cols={cols} exceeds rows={rows}")
    q, r = np.linalg.qr(gaussian(rng, rows, cols))
    # Fix signs so the factor is a deterministic function of the draw.
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
