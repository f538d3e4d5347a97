# srlora_tools/model/losses.py
"""
Batch losses and their gradients w.r.t. the network output.

Both losses average over the batch (columns).
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from ..errors import ValidationError
from ..linalg import Matrix, check_same_shape
from .model_types import LossKind


def check_one_hot(y: Matrix) -> None:
    """Every column must be a standard basis vector."""
    if not np.all((y == 0.0) | (y == 1.0)) or not np.all(y.sum(axis=0) == 1.0):
        raise ValidationError("cross-entropy targets must be one-hot columns")


def mse(y_hat: Matrix, y: Matrix) -> Tuple[float, Matrix]:
    batch = y.shape[1]
    diff = y_hat - y
    return 0.5 * float(np.sum(diff * diff)) / batch, diff / batch


def softmax_cross_entropy(logits: Matrix, y: Matrix) -> Tuple[float, Matrix]:
    check_one_hot(y)
    batch = y.shape[1]
    log_p = log_softmax(logits, axis=0)
    loss = -float(np.sum(y * log_p)) / batch
    return loss, (softmax(logits, axis=0) - y) / batch


def loss_and_grad(kind: LossKind, y_hat: Matrix, y: Matrix) -> Tuple[float, Matrix]:
    check_same_shape("loss_and_grad", y_hat, y)
    if kind is LossKind.MSE:
        return mse(y_hat, y)
    if kind is LossKind.SOFTMAX_CROSS_ENTROPY:
        return softmax_cross_entropy(y_hat, y)
    raise ValidationError(f"unknown loss kind: {kind}")


def accuracy(y_hat: Matrix, y: Matrix) -> float:
    """Fraction of columns whose argmax matches the one-hot target."""
    check_same_shape("accuracy", y_hat, y)
    return float(np.mean(np.argmax(y_hat, axis=0) == np.argmax(y, axis=0)))
