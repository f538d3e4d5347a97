"""
Exception hierarchy for srlora-tools.

Validation problems subclass ``ValueError`` so callers that only know about
the builtin still catch them; the CLI maps each family to an exit code.
"""

from typing import Optional, Tuple


class SrloraError(Exception):
    """Base class for all srlora-tools errors."""


class ValidationError(SrloraError, ValueError):
    """Rejected input: bad shapes, bad config, bad data."""


class ShapeError(ValidationError):
    """Operand shapes are incompatible."""

    def __init__(self, operation: str, *shapes: Tuple[int, ...], detail: str = ""):
        self.operation = operation
        self.shapes = shapes
        shown = " vs ".join(f"{s[0]}x{s[1]}" if len(s) == 2 else str(s) for s in shapes)
        message = f"{operation}: incompatible shapes {shown}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class ConfigError(ValidationError):
    """Run configuration failed validation."""


class DataError(ValidationError):
    """Dataset could not be parsed or is inconsistent."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ScheduleError(ValidationError):
    """Switch schedule arithmetic is not satisfiable."""


class ConvergenceError(SrloraError, RuntimeError):
    """An iterative kernel hit its iteration cap."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual norm {residual:.3e})")


class VerificationError(SrloraError):
    """A verification property failed."""


class CheckpointError(SrloraError):
    """Checkpoint file is corrupt or truncated."""


class DivergenceError(SrloraError, RuntimeError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"training diverged at step {step} (loss {loss})")
