# srlora_tools/data/csv_loader.py
"""
CSV dataset ingestion.

Dialect: comma separated, header row required, '.' decimal, UTF-8, no
quoting. Labels become one-hot targets in first-appearance order unless the
schema fixes the order.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import DataError
from ..linalg import as_matrix
from ..logging import get_logger
from .data_types import CsvSchema, Dataset, TaskKind

logger = get_logger("csv_loader")


def _physical_lines(path: Path) -> List[int]:
    """1-based file line of each data row; blank lines are skipped by the reader and here alike."""
    numbers = [n for n, text in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1) if text]
    return numbers[1:]


def _read_frame(path: Path) -> Tuple[pd.DataFrame, List[int]]:
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            sep=",",
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
            skip_blank_lines=True,
        )
        return frame, _physical_lines(path)
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"{path}: file is empty (a header row is required)") from exc
    except pd.errors.ParserError as exc:
        raise DataError(f"{path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8") from exc


def _check_cells(frame: pd.DataFrame, columns: List[str], lines: List[int]) -> None:
    for column in columns:
        values = frame[column]
        for row, cell in enumerate(values):
            if not isinstance(cell, str) or cell == "":
                raise DataError(f"column {column!r} is empty or missing", line=lines[row])
            if '"' in cell:
                raise DataError(f"quoted field in column {column!r}: {cell}", line=lines[row])


def _parse_features(frame: pd.DataFrame, columns: List[str], lines: List[int]) -> np.ndarray:
    parsed = []
    for column in columns:
        numeric = pd.to_numeric(frame[column], errors="coerce")
        bad = ~np.isfinite(numeric.to_numpy(dtype=np.float64))
        if bad.any():
            row = int(np.argmax(bad))
            raise DataError(
                f"column {column!r}: {frame[column].iloc[row]!r} is not a finite number", line=lines[row]
            )
        parsed.append(frame[column].astype(np.float64).to_numpy())
    return np.vstack(parsed)


def load_csv(path: Union[str, Path], schema: CsvSchema) -> Dataset:
    """Load a classification dataset described by ``schema``."""
    path = Path(path)
    frame, lines = _read_frame(path)
    needed = list(schema.feature_columns) + [schema.label_column]
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: header is missing columns {missing}")
    if len(frame) == 0:
        raise DataError(f"{path}: no data rows after the header")

    _check_cells(frame, needed, lines)
    inputs = _parse_features(frame, list(schema.feature_columns), lines)

    raw_labels = frame[schema.label_column].tolist()
    if schema.labels is not None:
        order = list(schema.labels)
        known = set(order)
        for row, label in enumerate(raw_labels):
            if label not in known:
                raise DataError(f"unknown label {label!r}", line=lines[row])
    else:
        order = list(pd.unique(pd.Series(raw_labels)))
    position = {label: k for k, label in enumerate(order)}

    targets = np.zeros((len(order), len(raw_labels)), dtype=np.float64)
    targets[[position[label] for label in raw_labels], np.arange(len(raw_labels))] = 1.0

    logger.info(f"Loaded {len(raw_labels)} rows, {inputs.shape[0]} features, labels {order} from {path}")
    return Dataset(
        inputs=as_matrix(inputs, "features"),
        targets=targets,
        kind=TaskKind.CLASSIFICATION,
        label_names=tuple(order),
        feature_names=tuple(schema.feature_columns),
    )


def write_csv(
    ds: Dataset,
    path: Union[str, Path],
    feature_columns: Optional[List[str]] = None,
    label_column: str = "label",
) -> CsvSchema:
    """Write a classification dataset in the dialect ``load_csv`` reads; returns the matching schema."""
    if ds.kind is not TaskKind.CLASSIFICATION:
        raise DataError("only classification datasets have a CSV form")
    names = feature_columns or list(ds.feature_names) or [f"x{i}" for i in range(ds.input_dim)]
    if len(names) != ds.input_dim:
        raise DataError(f"{len(names)} feature names for {ds.input_dim} features")
    label_names = list(ds.label_names) or [str(k) for k in range(ds.target_dim)]

    frame = pd.DataFrame(ds.inputs.T, columns=names)
    frame[label_column] = [label_names[k] for k in np.argmax(ds.targets, axis=0)]
    path = Path(path)
    frame.to_csv(path, index=False, quoting=csv.QUOTE_NONE, float_format="%.17g")
    return CsvSchema(path=str(path), feature_columns=names, label_column=label_column, labels=label_names)
