# srlora_tools/recompose/ledger_report.py
"""
Activation-interval analysis of a slot ledger, and its CSV exports.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from ..errors import DataError
from .recompose_types import SlotLedger

LEDGER_COLUMNS = ["layer_id", "slot", "singular_index", "activated_step", "retired_step"]
VARIANCE_COLUMNS = ["layer_id", "variance", "episode_count"]
INTERVAL_COLUMNS = LEDGER_COLUMNS + ["duration", "open"]


def _durations_by_layer(ledger: SlotLedger, n_all: int) -> Dict[int, np.ndarray]:
    grouped: Dict[int, list] = {}
    for layer_id, _, episode in ledger.iter_rows():
        grouped.setdefault(layer_id, []).append(episode.duration(n_all))
    return {layer_id: np.asarray(values, dtype=np.float64) for layer_id, values in grouped.items()}


def interval_variance(ledger: SlotLedger, n_all: int) -> Dict[int, float]:
    """Population variance of episode durations per layer; open episodes end at ``n_all``."""
    return {
        layer_id: float(np.var(durations))
        for layer_id, durations in sorted(_durations_by_layer(ledger, n_all).items())
    }


def ledger_frame(ledger: SlotLedger) -> pd.DataFrame:
    frame = pd.DataFrame(ledger.to_records(), columns=LEDGER_COLUMNS)
    frame["retired_step"] = frame["retired_step"].astype("Int64")
    return frame


def interval_table(ledger: SlotLedger, n_all: int) -> pd.DataFrame:
    """One row per episode with its duration."""
    frame = ledger_frame(ledger)
    open_mask = frame["retired_step"].isna()
    frame["duration"] = frame["retired_step"].fillna(n_all).astype("int64") - frame["activated_step"]
    frame["open"] = open_mask.astype("int64")
    return frame[INTERVAL_COLUMNS]


def variance_frame(ledger: SlotLedger, n_all: int) -> pd.DataFrame:
    durations = _durations_by_layer(ledger, n_all)
    rows = [
        [layer_id, float(np.var(values)), int(values.size)]
        for layer_id, values in sorted(durations.items())
    ]
    return pd.DataFrame(rows, columns=VARIANCE_COLUMNS)


def write_ledger_csv(ledger: SlotLedger, path: Union[str, Path]) -> Path:
    path = Path(path)
    ledger_frame(ledger).to_csv(path, index=False)
    return path


def read_ledger_csv(path: Union[str, Path]) -> SlotLedger:
    """Inverse of ``write_ledger_csv``."""
    frame = pd.read_csv(path, dtype={"retired_step": "Int64"})
    missing = [c for c in LEDGER_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: ledger is missing columns {missing}")
    records = [
        [int(row.layer_id), int(row.slot), int(row.singular_index), int(row.activated_step),
         None if pd.isna(row.retired_step) else int(row.retired_step)]
        for row in frame.itertuples(index=False)
    ]
    return SlotLedger.from_records(records)
