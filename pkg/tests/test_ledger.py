# tests/test_ledger.py
import pandas as pd
import pytest

from srlora_tools.errors import DataError, ValidationError
from srlora_tools.recompose import (
    Episode, SlotLedger, interval_table, interval_variance, ledger_frame, read_ledger_csv, variance_frame,
    write_ledger_csv,
)
from srlora_tools.recompose.ledger_report import INTERVAL_COLUMNS, LEDGER_COLUMNS, VARIANCE_COLUMNS


def sample_ledger() -> SlotLedger:
    ledger = SlotLedger()
    ledger.open(0, 0, 0, 0)
    ledger.open(0, 1, 1, 0)
    ledger.retire(0, 0, 30)
    ledger.open(0, 0, 2, 30)
    ledger.open(1, 0, 0, 0)
    return ledger


def test_episode_duration_closes_open_episodes_at_run_end():
    assert Episode(3, 10, 25).duration(100) == 15
    assert Episode(3, 10).duration(100) == 90
    assert Episode(3, 10).is_open


def test_ledger_rejects_overlap_and_reuse():
    ledger = sample_ledger()
    with pytest.raises(ValidationError, match="open episode"):
        ledger.open(0, 1, 5, 40)
    with pytest.raises(ValidationError, match="already activated"):
        ledger.retire(0, 1, 40)
        ledger.open(0, 1, 2, 40)
    with pytest.raises(ValidationError, match="overlaps"):
        ledger.open(0, 1, 6, 39)


def test_retire_without_open_episode_is_a_no_op():
    ledger = SlotLedger()
    ledger.retire(0, 0, 5)
    assert len(ledger) == 0


def test_ledger_queries():
    ledger = sample_ledger()
    assert len(ledger) == 4
    assert ledger.layer_ids() == [0, 1]
    assert ledger.activated_indices(0) == [0, 1, 2]
    assert [(lid, slot, e.singular_index) for lid, slot, e in ledger.iter_rows()] == [
        (0, 0, 0), (0, 0, 2), (0, 1, 1), (1, 0, 0),
    ]
    assert SlotLedger.from_records(ledger.to_records()).to_records() == ledger.to_records()


def test_interval_variance_hand_computed():
    # layer 0 durations: 30, 70, 100
    variances = interval_variance(sample_ledger(), n_all=100)
    assert variances[0] == pytest.approx(7400.0 / 9.0)
    assert variances[1] == 0.0


def test_frames_have_stable_columns():
    ledger = sample_ledger()
    assert list(ledger_frame(ledger).columns) == LEDGER_COLUMNS
    table = interval_table(ledger, 100)
    assert list(table.columns) == INTERVAL_COLUMNS
    assert table["duration"].tolist() == [30, 70, 100, 100]
    assert table["open"].tolist() == [0, 1, 1, 1]
    variance = variance_frame(ledger, 100)
    assert list(variance.columns) == VARIANCE_COLUMNS
    assert variance["episode_count"].tolist() == [3, 1]


def test_empty_ledger_frames():
    assert ledger_frame(SlotLedger()).empty
    assert variance_frame(SlotLedger(), 10).empty


def test_ledger_csv_keeps_open_episodes(tmp_path):
    path = write_ledger_csv(sample_ledger(), tmp_path / "ledger.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == LEDGER_COLUMNS
    assert read_ledger_csv(path).to_records() == sample_ledger().to_records()


def test_read_ledger_csv_requires_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("layer_id,slot\n0,0\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_ledger_csv(path)
