"""
Subspace recomposition: switch schedule, slot recycling and the slot ledger.
"""

from .recompose_types import Episode, ResetScope, SlotLedger, SwitchOutcome, SwitchSchedule
from .schedule import build_schedule, recycled_per_switch
from .recomposer import fuse_slots, recompose_step, register_layer, reinit_slots, select_low_importance
from .ledger_report import (
    interval_table, interval_variance, ledger_frame, read_ledger_csv, variance_frame, write_ledger_csv,
)

__all__ = [
    "Episode", "ResetScope", "SlotLedger", "SwitchOutcome", "SwitchSchedule",
    "build_schedule", "recycled_per_switch",
    "fuse_slots", "recompose_step", "register_layer", "reinit_slots", "select_low_importance",
    "interval_table", "interval_variance", "ledger_frame", "read_ledger_csv", "variance_frame",
    "write_ledger_csv",
]
