# srlora_tools/data/data_types.py
"""
Dataset containers and task descriptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DataError
from ..linalg import Matrix


class TaskKind(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


@dataclass(frozen=True)
class Dataset:
    """Column-stacked samples: ``inputs`` is features x samples, ``targets`` target-dim x samples."""
    inputs: Matrix
    targets: Matrix
    kind: TaskKind = TaskKind.REGRESSION
    label_names: Tuple[str, ...] = ()
    feature_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise DataError("inputs and targets must be 2-D")
        if self.inputs.shape[1] != self.targets.shape[1]:
            raise DataError(
                f"sample counts differ: {self.inputs.shape[1]} inputs vs {self.targets.shape[1]} targets"
            )
        if self.kind is TaskKind.CLASSIFICATION:
            t = self.targets
            if not np.all((t == 0.0) | (t == 1.0)) or not np.all(t.sum(axis=0) == 1.0):
                raise DataError("classification targets must be one-hot columns")
            if self.label_names and len(self.label_names) != t.shape[0]:
                raise DataError(f"{len(self.label_names)} label names for {t.shape[0]} classes")

    @property
    def n_samples(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def target_dim(self) -> int:
        return int(self.targets.shape[0])

    def take(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            inputs=np.ascontiguousarray(self.inputs[:, idx]),
            targets=np.ascontiguousarray(self.targets[:, idx]),
            kind=self.kind,
            label_names=self.label_names,
            feature_names=self.feature_names,
        )


@dataclass(frozen=True)
class TeacherSpec:
    """Hidden teacher ``y = (w0 + delta_star) x + noise``; ``delta_star`` has rank ``k_star``."""
    w0: Matrix
    delta_star: Matrix
    noise_std: float = 0.0
    seed: int = 0
    k_star: int = 0

    def __post_init__(self):
        if self.w0.shape != self.delta_star.shape:
            raise DataError(f"w0 {self.w0.shape} and delta_star {self.delta_star.shape} differ in shape")
        if self.noise_std < 0:
            raise DataError(f"noise_std must be >= 0, got {self.noise_std}")

    @property
    def target_weight(self) -> Matrix:
        return self.w0 + self.delta_star

    @property
    def d_in(self) -> int:
        return int(self.w0.shape[1])

    @property
    def d_out(self) -> int:
        return int(self.w0.shape[0])


@dataclass(frozen=True)
class CsvSchema:
    """Which CSV columns are features and which one is the label."""
    path: str
    feature_columns: List[str] = field(default_factory=list)
    label_column: str = "label"
    # When given, the one-hot order; labels outside it are rejected.
    labels: Optional[List[str]] = None

    def __post_init__(self):
        if not self.feature_columns:
            raise DataError("a CSV schema needs at least one feature column")
        if self.label_column in self.feature_columns:
            raise DataError(f"label column {self.label_column!r} is also listed as a feature")
        if len(set(self.feature_columns)) != len(self.feature_columns):
            raise DataError("feature columns must be unique")
        if self.labels is not None and len(set(self.labels)) != len(self.labels):
            raise DataError("schema labels must be unique")
