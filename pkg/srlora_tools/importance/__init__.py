"""
Importance scoring for rank-1 adapter slots.
"""

from .importance_types import ImportanceState, SlotScores
from .scorer import ema_update, param_score, reset_slots, sensitivity, slot_scores

__all__ = [
    "ImportanceState", "SlotScores",
    "ema_update", "param_score", "reset_slots", "sensitivity", "slot_scores",
]
