# srlora_tools/importance/importance_types.py
"""
Importance tracking state for one adapted layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..linalg import Matrix


@dataclass(frozen=True)
class ImportanceState:
    """EMA-smoothed sensitivity (``i_bar``) and uncertainty (``u_bar``) for ``b`` and ``a``."""
    i_bar_b: Matrix  # m x r
    u_bar_b: Matrix  # m x r
    i_bar_a: Matrix  # r x n
    u_bar_a: Matrix  # r x n
    beta1: float = 0.85
    beta2: float = 0.85
    step: int = 0

    @property
    def rank(self) -> int:
        return int(self.i_bar_b.shape[1])

    @classmethod
    def fresh(cls, out_features: int, in_features: int, rank: int,
              beta1: float = 0.85, beta2: float = 0.85, step: int = 0) -> "ImportanceState":
        for name, beta in (("beta1", beta1), ("beta2", beta2)):
            if not 0.0 < beta < 1.0:
                raise ValidationError(f"{name} must be in (0, 1), got {beta}")
        zeros_b = np.zeros((out_features, rank), dtype=np.float64)
        zeros_a = np.zeros((rank, in_features), dtype=np.float64)
        return cls(
            i_bar_b=zeros_b, u_bar_b=zeros_b.copy(),
            i_bar_a=zeros_a, u_bar_a=zeros_a.copy(),
            beta1=beta1, beta2=beta2, step=step,
        )


@dataclass(frozen=True)
class SlotScores:
    """Per-slot aggregate importance ``S_k``."""
    scores: np.ndarray

    def __len__(self) -> int:
        return int(self.scores.shape[0])
