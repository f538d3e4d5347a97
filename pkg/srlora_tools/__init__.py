# srlora_tools/__init__.py
"""
srlora-tools - dynamic subspace recomposition for low-rank adapters.

This package provides:
- A rank-r adapter on a frozen linear layer with analytic gradients
- Per-entry importance tracking and importance-driven slot recycling
- A deterministic trainer with a switch schedule and a singular-index ledger
- Finite-difference and property-based verification suites
- CSV reports and a command-line runner
"""

__version__ = "0.1.0"

from . import adapter
from . import importance
from . import linalg
from . import recompose

from .errors import (
    CheckpointError, ConfigError, ConvergenceError, DataError, DivergenceError, ScheduleError, ShapeError,
    SrloraError, ValidationError, VerificationError,
)
from .trainer import RunConfig, SrloraTrainer, load_run_config, train

__all__ = [
    "__version__",
    "adapter", "importance", "linalg", "recompose",
    "CheckpointError", "ConfigError", "ConvergenceError", "DataError", "DivergenceError", "ScheduleError", "ShapeError",
    "SrloraError", "ValidationError", "VerificationError",
    "RunConfig", "SrloraTrainer", "load_run_config", "train",
]

__doc__ += """
Quick Start:
    from srlora_tools import load_run_config, train

    result = train(load_run_config("configs/teacher_student_srlora.json"))
    print(result.log.final_row())
"""
