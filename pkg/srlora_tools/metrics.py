# srlora_tools/metrics.py
"""
Metrics collection module for srlora-tools.

This module records the training curve of a run (one row per evaluation),
the per-switch function-preservation records and the per-slot importance
scores, and exports them as CSV and JSON summaries.
"""

import json
import math
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd

from .errors import DataError
from .logging import get_logger

METRIC_COLUMNS = ["step", "train_loss", "eval_loss", "eval_accuracy", "switch_flag"]
SCORE_COLUMNS = ["step", "layer_id", "slot", "singular_index", "score"]


@dataclass
class MetricRow:
    """One evaluation point. ``wall_time`` is kept out of equality and of ``metrics.csv``."""
    step: int
    train_loss: Optional[float]
    eval_loss: float
    eval_accuracy: Optional[float] = None
    switch_flag: int = 0
    wall_time: float = field(default=0.0, compare=False)

    def as_record(self) -> List[Any]:
        return [self.step, self.train_loss, self.eval_loss, self.eval_accuracy, self.switch_flag]


@dataclass
class SwitchRecord:
    """What one switch did to one layer, and how well it preserved the network's function."""
    step: int
    layer_id: int
    slots: Tuple[int, ...]
    new_indices: Tuple[int, ...]
    skipped: bool
    probe_loss_before: float
    probe_loss_after: float
    max_output_rel_diff: float

    @property
    def probe_loss_rel_diff(self) -> float:
        denom = abs(self.probe_loss_before)
        diff = abs(self.probe_loss_after - self.probe_loss_before)
        return diff / denom if denom > 0 else diff


@dataclass(frozen=True)
class SlotScoreRow:
    """Aggregate importance of one slot at one evaluation step; ``singular_index`` is -1 for an empty slot."""
    step: int
    layer_id: int
    slot: int
    singular_index: int
    score: float

    def as_record(self) -> List[Any]:
        return [self.step, self.layer_id, self.slot, self.singular_index, self.score]


class MetricLog:
    """Collects metric rows, switch records and slot-score snapshots for a single run."""

    def __init__(
        self,
        rows: Optional[List[MetricRow]] = None,
        switches: Optional[List[SwitchRecord]] = None,
        scores: Optional[List[SlotScoreRow]] = None,
    ):
        """Initialize an empty (or pre-filled) log."""
        self.logger = get_logger("metrics")
        self._lock = threading.Lock()
        self.rows: List[MetricRow] = list(rows or [])
        self.switches: List[SwitchRecord] = list(switches or [])
        self.scores: List[SlotScoreRow] = list(scores or [])

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricLog):
            return NotImplemented
        return self.rows == other.rows

    def append(self, row: MetricRow) -> None:
        """Append a metric row and log it."""
        with self._lock:
            self.rows.append(row)
        train = "-" if row.train_loss is None else f"{row.train_loss:.6g}"
        accuracy = "" if row.eval_accuracy is None else f" eval_acc={row.eval_accuracy:.4f}"
        self.logger.info(
            f"step {row.step}: train_loss={train} eval_loss={row.eval_loss:.6g}{accuracy}"
            f"{' [switch]' if row.switch_flag else ''}"
        )

    def record_switch(self, record: SwitchRecord) -> None:
        with self._lock:
            self.switches.append(record)

    def record_scores(self, rows: Iterable[SlotScoreRow]) -> None:
        with self._lock:
            self.scores.extend(rows)

    def final_row(self) -> Optional[MetricRow]:
        return self.rows[-1] if self.rows else None

    def row_at(self, step: int) -> Optional[MetricRow]:
        for row in self.rows:
            if row.step == step:
                return row
        return None

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([row.as_record() for row in self.rows], columns=METRIC_COLUMNS)
        frame["step"] = frame["step"].astype("int64")
        frame["switch_flag"] = frame["switch_flag"].astype("int64")
        return frame

    def switch_frame(self) -> pd.DataFrame:
        records = [
            {**asdict(r), "slots": " ".join(map(str, r.slots)), "new_indices": " ".join(map(str, r.new_indices))}
            for r in self.switches
        ]
        columns = [
            "step", "layer_id", "slots", "new_indices", "skipped",
            "probe_loss_before", "probe_loss_after", "max_output_rel_diff",
        ]
        return pd.DataFrame(records, columns=columns)

    def score_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([row.as_record() for row in self.scores], columns=SCORE_COLUMNS)
        for column in ("step", "layer_id", "slot", "singular_index"):
            frame[column] = frame[column].astype("int64")
        return frame

    def write_csv(self, path: Union[str, Path]) -> Path:
        """Write ``metrics.csv`` (header row, no wall time)."""
        path = Path(path)
        self.to_frame().to_csv(path, index=False)
        return path

    def write_scores_csv(self, path: Union[str, Path]) -> Path:
        """Write the slot-score time series, one row per (step, layer, slot)."""
        path = Path(path)
        self.score_frame().to_csv(path, index=False)
        return path

    def write_switches_csv(self, path: Union[str, Path]) -> Path:
        """One row per (switch, layer), slot and index lists space-joined."""
        path = Path(path)
        self.switch_frame().to_csv(path, index=False)
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "MetricLog":
        frame = pd.read_csv(path)
        missing = [c for c in METRIC_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"{path}: metrics file is missing columns {missing}")

        def _opt(value: Any) -> Optional[float]:
            return None if value is None or (isinstance(value, float) and math.isnan(value)) else float(value)

        rows = [
            MetricRow(
                step=int(r.step),
                train_loss=_opt(r.train_loss),
                eval_loss=float(r.eval_loss),
                eval_accuracy=_opt(r.eval_accuracy),
                switch_flag=int(r.switch_flag),
            )
            for r in frame.itertuples(index=False)
        ]
        return cls(rows=rows)

    def get_summary(self) -> Dict[str, Any]:
        """Get a summary of the run's metrics."""
        final = self.final_row()
        preserved = [r.max_output_rel_diff for r in self.switches if not r.skipped]
        return {
            "rows": len(self.rows),
            "final_step": final.step if final else None,
            "final_train_loss": final.train_loss if final else None,
            "final_eval_loss": final.eval_loss if final else None,
            "final_eval_accuracy": final.eval_accuracy if final else None,
            "switches": sum(1 for r in self.switches if not r.skipped),
            "skipped_switches": sum(1 for r in self.switches if r.skipped),
            "max_switch_output_rel_diff": max(preserved, default=0.0),
            "wall_time_seconds": final.wall_time if final else 0.0,
        }

    def export_summary(self, filepath: Union[str, Path]) -> Path:
        """Export the summary to a JSON file."""
        filepath = Path(filepath)
        with open(filepath, "w") as f:
            json.dump(self.get_summary(), f, indent=2, default=str)
        self.logger.info(f"Metrics summary exported to {filepath}")
        return filepath


class RunClock:
    """Wall-clock seconds since the run started; pauses are carried across resumes via ``offset``."""

    def __init__(self, offset: float = 0.0):
        self.offset = offset
        self._start = time.perf_counter()

    def elapsed(self) -> float:
        return self.offset + (time.perf_counter() - self._start)
