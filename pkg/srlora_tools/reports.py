# srlora_tools/reports.py
"""
CSV reports derived from a finished run directory, and the seed-sweep
comparison table.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Union

import pandas as pd

from .errors import ValidationError
from .logging import get_logger
from .metrics import MetricLog
from .recompose import interval_table, read_ledger_csv, variance_frame
from .trainer import CONFIG_FILE, LEDGER_FILE, METRICS_FILE

logger = get_logger("reports")

REPORT_KINDS = ("intervals", "variance", "loss")
LOSS_COLUMNS = ["step", "train_loss", "eval_loss", "switch_flag"]
COMPARE_COLUMNS = ["seed", "final_loss_a", "final_loss_b"]


def _require(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"run artifact not found: {path}")
    return path


def _run_length(run_dir: Path) -> int:
    config = json.loads(_require(run_dir / CONFIG_FILE).read_text(encoding="utf-8"))
    return int(config["n_all"])


def build_report(run_dir: Union[str, Path], kind: str) -> pd.DataFrame:
    run_dir = Path(run_dir)
    if kind == "loss":
        log = MetricLog.read_csv(_require(run_dir / METRICS_FILE))
        return log.to_frame()[LOSS_COLUMNS]
    if kind in ("intervals", "variance"):
        ledger = read_ledger_csv(_require(run_dir / LEDGER_FILE))
        n_all = _run_length(run_dir)
        return interval_table(ledger, n_all) if kind == "intervals" else variance_frame(ledger, n_all)
    raise ValidationError(f"unknown report kind {kind!r}; choose from {', '.join(REPORT_KINDS)}")


def write_report(run_dir: Union[str, Path], kind: str) -> Path:
    """Write ``<kind>.csv`` into ``run_dir``."""
    frame = build_report(run_dir, kind)
    out = Path(run_dir) / f"{kind}.csv"
    frame.to_csv(out, index=False)
    logger.info(f"Wrote {kind} report ({len(frame)} rows) to {out}")
    return out


@dataclass(frozen=True)
class CompareRow:
    seed: int
    final_loss_a: float
    final_loss_b: float

    @property
    def winner(self) -> str:
        if self.final_loss_a < self.final_loss_b:
            return "a"
        if self.final_loss_b < self.final_loss_a:
            return "b"
        return "tie"


def final_loss(log: MetricLog) -> float:
    """Training loss of the last row, or its eval loss when no gradient step was logged."""
    row = log.final_row()
    if row is None:
        raise ValidationError("run produced no metric rows")
    return row.train_loss if row.train_loss is not None else row.eval_loss


def compare_frame(rows: List[CompareRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [[r.seed, r.final_loss_a, r.final_loss_b] for r in sorted(rows, key=lambda r: r.seed)],
        columns=COMPARE_COLUMNS,
    )


def winner_counts(rows: List[CompareRow]) -> Dict[str, int]:
    counts = {"a": 0, "b": 0, "tie": 0}
    for row in rows:
        counts[row.winner] += 1
    return counts
