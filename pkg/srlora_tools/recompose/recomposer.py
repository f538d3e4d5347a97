# srlora_tools/recompose/recomposer.py
"""
The recomposition switch.

At a switch the ``r'`` least important slots of a layer are fused into the
frozen weight, refilled with the next unused singular directions of the
pretrained weight, and that fresh projection is subtracted from the frozen
weight again. The layer's effective map is unchanged by the switch.
"""

from __future__ import annotations

from typing import Iterable, Optional, Tuple

import numpy as np

from ..adapter import NO_DIRECTION, LoraLinear, direction_pair
from ..errors import ValidationError
from ..importance import ImportanceState, SlotScores, reset_slots, slot_scores
from ..linalg import validate_indices
from ..logging import get_logger
from .recompose_types import ResetScope, SlotLedger, SwitchOutcome, SwitchSchedule

logger = get_logger("recomposer")


def register_layer(layer: LoraLinear, ledger: SlotLedger, layer_id: int, step: int = 0) -> None:
    """Open an episode for every slot that currently holds a singular direction."""
    for slot, singular_index in enumerate(layer.slot_meta):
        if singular_index != NO_DIRECTION:
            ledger.open(layer_id, slot, singular_index, step)


def select_low_importance(scores: SlotScores, r_prime: int) -> Tuple[int, ...]:
    """The ``r_prime`` slots with the smallest score, ties to the smaller index, in ascending slot order."""
    if r_prime < 0 or r_prime > len(scores):
        raise ValidationError(f"r_prime must be in [0, {len(scores)}], got {r_prime}")
    order = np.argsort(scores.scores, kind="stable")
    return tuple(sorted(int(i) for i in order[:r_prime]))


def fuse_slots(
    layer: LoraLinear,
    slots: Iterable[int],
    ledger: Optional[SlotLedger] = None,
    layer_id: int = 0,
    step: int = 0,
) -> Tuple[int, ...]:
    """Merge ``scale * b[:, slots] @ a[slots, :]`` into ``w`` and zero those slots."""
    chosen = validate_indices(slots, layer.rank)
    if not chosen:
        return chosen
    idx = list(chosen)
    layer.w = layer.w + layer.scale * (layer.b[:, idx] @ layer.a[idx, :])
    layer.b[:, idx] = 0.0
    layer.a[idx, :] = 0.0
    for slot in chosen:
        layer.slot_meta[slot] = NO_DIRECTION
        if ledger is not None:
            ledger.retire(layer_id, slot, step)
    return chosen


def reinit_slots(
    layer: LoraLinear,
    slots: Iterable[int],
    step: int,
    ledger: Optional[SlotLedger] = None,
    layer_id: int = 0,
) -> Tuple[int, ...]:
    """Fill ``slots`` with singular directions ``p_r, p_r+1, ...`` and subtract them from ``w``.

    Returns the singular indices placed, in slot order. When the direction
    bank cannot cover every slot nothing changes and ``()`` is returned.
    """
    chosen = validate_indices(slots, layer.rank)
    if not chosen:
        return ()
    if layer.p_r + len(chosen) > layer.direction_bank:
        logger.warning(
            f"Layer {layer_id}: direction bank exhausted at step {step} "
            f"(p_r={layer.p_r}, need {len(chosen)}, bank {layer.direction_bank}); slots left as-is"
        )
        return ()

    fold = layer.fold()
    idx = list(chosen)
    new_indices = tuple(range(layer.p_r, layer.p_r + len(chosen)))
    for slot, singular_index in zip(idx, new_indices):
        column, row = direction_pair(layer.svd0, singular_index, fold)
        layer.b[:, slot] = column
        layer.a[slot, :] = row
        layer.slot_meta[slot] = singular_index
        if ledger is not None:
            ledger.open(layer_id, slot, singular_index, step)
    layer.w = layer.w - layer.scale * (layer.b[:, idx] @ layer.a[idx, :])
    layer.p_r += len(chosen)
    return new_indices


def recompose_step(
    layer: LoraLinear,
    state: ImportanceState,
    schedule: SwitchSchedule,
    ledger: SlotLedger,
    step: int,
    layer_id: int = 0,
    reset_scope: ResetScope = ResetScope.RECYCLED,
    r_prime: Optional[int] = None,
) -> SwitchOutcome:
    """One switch on one layer: select, fuse, reinitialize, reset importance.

    ``r_prime`` defaults to the schedule's; layers whose rank differs from the
    global one pass their own ``gamma * rank``.
    """
    if not schedule.is_switch_step(step):
        raise ValidationError(f"step {step} is not a switch step of the schedule")
    try:
        reset_scope = ResetScope(reset_scope)
    except ValueError as exc:
        choices = [s.value for s in ResetScope]
        raise ValidationError(f"reset_scope must be one of {choices}, got {reset_scope!r}") from exc
    count = schedule.r_prime if r_prime is None else r_prime

    if layer.p_r + count > layer.direction_bank:
        logger.warning(
            f"Layer {layer_id}: switch at step {step} skipped, direction bank exhausted "
            f"(p_r={layer.p_r}, r'={count}, bank {layer.direction_bank})"
        )
        return SwitchOutcome(slots=(), new_indices=(), state=state, skipped=True)

    slots = select_low_importance(slot_scores(state), count)
    fuse_slots(layer, slots, ledger=ledger, layer_id=layer_id, step=step)
    new_indices = reinit_slots(layer, slots, step, ledger=ledger, layer_id=layer_id)

    if reset_scope is ResetScope.ALL:
        state = reset_slots(state, range(state.rank))
    else:
        state = reset_slots(state, slots)

    logger.info(f"Switch at step {step}, layer {layer_id}: slots {list(slots)} -> directions {list(new_indices)}")
    return SwitchOutcome(slots=slots, new_indices=new_indices, state=state)
