# srlora_tools/importance/scorer.py
"""
Sensitivity-based importance scoring.

Per parameter: sensitivity ``|w * g|``, EMA-smoothed sensitivity and its
EMA-smoothed deviation, final score their product. Per rank-1 slot ``k``:
mean score over column ``k`` of ``b`` plus mean score over row ``k`` of ``a``.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Tuple

import numpy as np

from ..adapter import LayerGrads, LoraLinear
from ..errors import ShapeError
from ..linalg import Matrix, check_same_shape, validate_indices
from .importance_types import ImportanceState, SlotScores


def sensitivity(w: Matrix, g: Matrix) -> Matrix:
    """First-order estimate of the loss change from zeroing each entry."""
    check_same_shape("sensitivity", w, g)
    return np.abs(w * g)


def _smooth(i_bar: Matrix, u_bar: Matrix, current: Matrix, beta1: float, beta2: float) -> Tuple[Matrix, Matrix]:
    new_i = beta1 * i_bar + (1.0 - beta1) * current
    # deviation is measured against the freshly updated estimate
    new_u = beta2 * u_bar + (1.0 - beta2) * np.abs(current - new_i)
    return new_i, new_u


def ema_update(state: ImportanceState, grads: LayerGrads, layer: LoraLinear) -> ImportanceState:
    """Fold one step of gradients into the smoothed state. Call before the optimizer moves ``b``/``a``."""
    if state.i_bar_b.shape != layer.b.shape or state.i_bar_a.shape != layer.a.shape:
        raise ShapeError("ema_update", tuple(state.i_bar_b.shape), tuple(layer.b.shape), detail="state vs layer")
    i_b, u_b = _smooth(state.i_bar_b, state.u_bar_b, sensitivity(layer.b, grads.d_b), state.beta1, state.beta2)
    i_a, u_a = _smooth(state.i_bar_a, state.u_bar_a, sensitivity(layer.a, grads.d_a), state.beta1, state.beta2)
    return replace(state, i_bar_b=i_b, u_bar_b=u_b, i_bar_a=i_a, u_bar_a=u_a, step=state.step + 1)


def param_score(state: ImportanceState) -> Tuple[Matrix, Matrix]:
    """Final per-parameter scores for ``b`` and ``a``."""
    return state.i_bar_b * state.u_bar_b, state.i_bar_a * state.u_bar_a


def slot_scores(state: ImportanceState) -> SlotScores:
    score_b, score_a = param_score(state)
    return SlotScores(scores=score_b.mean(axis=0) + score_a.mean(axis=1))


def reset_slots(state: ImportanceState, slots: Iterable[int]) -> ImportanceState:
    """Zero the tracked statistics of ``slots``; others and ``step`` are untouched."""
    chosen = list(validate_indices(slots, state.rank))
    if not chosen:
        return state
    i_b, u_b = state.i_bar_b.copy(), state.u_bar_b.copy()
    i_a, u_a = state.i_bar_a.copy(), state.u_bar_a.copy()
    i_b[:, chosen] = 0.0
    u_b[:, chosen] = 0.0
    i_a[chosen, :] = 0.0
    u_a[chosen, :] = 0.0
    return replace(state, i_bar_b=i_b, u_bar_b=u_b, i_bar_a=i_a, u_bar_a=u_a)
