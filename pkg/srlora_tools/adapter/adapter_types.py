# srlora_tools/adapter/adapter_types.py
"""
Types for LoRA-adapted linear layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from ..linalg import Matrix, SvdFactors

# slot_meta value for a slot that does not hold a singular direction
NO_DIRECTION = -1


class InitKind(Enum):
    """How the adapter factors were initialized."""
    PISSA = "pissa"
    LORA = "lora"


@dataclass
class LoraLinear:
    """Frozen weight plus trainable low-rank factors: ``y = (w + scale * b @ a) x``.

    ``w`` starts as the residual of the pretrained weight and only changes at
    recomposition; ``svd0`` is the SVD of the pretrained weight and is never
    mutated. ``p_r`` is the next unused singular index.
    """
    w: Matrix
    svd0: SvdFactors
    b: Matrix
    a: Matrix
    rank: int
    alpha: float
    p_r: int
    slot_meta: List[int] = field(default_factory=list)
    init_kind: InitKind = InitKind.PISSA

    @property
    def scale(self) -> float:
        return self.alpha / self.rank

    @property
    def in_features(self) -> int:
        return int(self.w.shape[1])

    @property
    def out_features(self) -> int:
        return int(self.w.shape[0])

    @property
    def direction_bank(self) -> int:
        """Number of singular directions available, ``min(m, n)``."""
        return self.svd0.rank_bound

    @property
    def trainable_count(self) -> int:
        return int(self.b.size + self.a.size)

    def fold(self) -> float:
        """Factor multiplied into both halves of a singular pair so ``scale * b @ a`` is alpha-free."""
        return float(np.sqrt(self.rank / self.alpha))


@dataclass(frozen=True)
class LayerGrads:
    """Gradients of a scalar loss w.r.t. ``b``, ``a`` and the layer input."""
    d_b: Matrix  # m x r
    d_a: Matrix  # r x n
    d_x: Matrix  # n x batch
