"""
Synthetic tasks, CSV ingestion and batching.
"""

from .data_types import CsvSchema, Dataset, TaskKind, TeacherSpec
from .synthetic import (
    EVAL_SPLIT, TRAIN_SPLIT, delta_spectrum, gen_teacher_classification, gen_teacher_student,
    make_teacher_spec, population_mse, static_floor,
)
from .csv_loader import load_csv, write_csv
from .batching import BatchStream, batches, train_eval_split

__all__ = [
    "CsvSchema", "Dataset", "TaskKind", "TeacherSpec",
    "EVAL_SPLIT", "TRAIN_SPLIT", "delta_spectrum", "gen_teacher_classification", "gen_teacher_student",
    "make_teacher_spec", "population_mse", "static_floor",
    "load_csv", "write_csv",
    "BatchStream", "batches", "train_eval_split",
]
