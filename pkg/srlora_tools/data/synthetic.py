# srlora_tools/data/synthetic.py
"""
Teacher-student tasks with a hidden low-rank update.

The pretrained weight ``w0`` has i.i.d. ``N(0, (w0_scale / sqrt(d_in))^2)``
entries. The hidden update is ``Q1 diag(sigma) Q2^T`` with random
orthonormal ``Q1``, ``Q2`` and singular values evenly spaced from
``1.5 * delta_scale`` down to ``0.5 * delta_scale``, so its rank is exactly
``k_star``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..adapter import InitKind
from ..errors import ValidationError
from ..linalg import Matrix, Rng, best_rank_k_error, gaussian, orthonormal_columns, svd, truncate
from .data_types import Dataset, TaskKind, TeacherSpec

# Stream keys under the task seed.
W0_STREAM = 1
DELTA_STREAM = 2
SAMPLE_STREAM = 3
NOISE_STREAM = 4

TRAIN_SPLIT = 0
EVAL_SPLIT = 1


def delta_spectrum(k_star: int, delta_scale: float = 1.0) -> np.ndarray:
    if k_star == 0:
        return np.zeros(0, dtype=np.float64)
    return np.linspace(1.5, 0.5, k_star) * delta_scale


def make_teacher_spec(
    d_in: int,
    d_out: int,
    k_star: int,
    seed: int,
    noise_std: float = 0.0,
    w0_scale: float = 1.0,
    delta_scale: float = 1.0,
) -> TeacherSpec:
    if d_in < 1 or d_out < 1:
        raise ValidationError(f"d_in and d_out must be positive, got {d_in}, {d_out}")
    if not 0 <= k_star <= min(d_in, d_out):
        raise ValidationError(f"k_star must be in [0, {min(d_in, d_out)}], got {k_star}")
    if w0_scale < 0 or delta_scale < 0:
        raise ValidationError("w0_scale and delta_scale must be >= 0")

    root = Rng(seed)
    w0 = gaussian(root.derive(W0_STREAM), d_out, d_in, 0.0, w0_scale / np.sqrt(d_in))
    if k_star == 0:
        delta = np.zeros((d_out, d_in), dtype=np.float64)
    else:
        stream = root.derive(DELTA_STREAM)
        q1 = orthonormal_columns(stream, d_out, k_star)
        q2 = orthonormal_columns(stream, d_in, k_star)
        delta = (q1 * delta_spectrum(k_star, delta_scale)) @ q2.T
    return TeacherSpec(w0=w0, delta_star=delta, noise_std=float(noise_std), seed=seed, k_star=k_star)


def _draw_inputs(spec: TeacherSpec, n_samples: int, split: int) -> Matrix:
    if n_samples < 1:
        raise ValidationError(f"n_samples must be >= 1, got {n_samples}")
    return gaussian(Rng(spec.seed).derive(SAMPLE_STREAM, split), spec.d_in, n_samples)


def gen_teacher_student(spec: TeacherSpec, n_samples: int, split: int = TRAIN_SPLIT) -> Dataset:
    """Regression samples ``y = (w0 + delta_star) x + eps`` with ``x ~ N(0, I)``."""
    x = _draw_inputs(spec, n_samples, split)
    y = spec.target_weight @ x
    if spec.noise_std > 0:
        y = y + gaussian(Rng(spec.seed).derive(NOISE_STREAM, split), spec.d_out, n_samples, 0.0, spec.noise_std)
    return Dataset(inputs=x, targets=y, kind=TaskKind.REGRESSION)


def gen_teacher_classification(spec: TeacherSpec, n_samples: int, split: int = TRAIN_SPLIT) -> Dataset:
    """Class = argmax of the teacher's logits; ``d_out`` classes named ``"0"``, ``"1"``, ..."""
    x = _draw_inputs(spec, n_samples, split)
    labels = np.argmax(spec.target_weight @ x, axis=0)
    targets = np.zeros((spec.d_out, n_samples), dtype=np.float64)
    targets[labels, np.arange(n_samples)] = 1.0
    names = tuple(str(k) for k in range(spec.d_out))
    return Dataset(inputs=x, targets=targets, kind=TaskKind.CLASSIFICATION, label_names=names)


def population_mse(spec: TeacherSpec, w_eff: Matrix, bias: Optional[Matrix] = None) -> float:
    """Expected per-sample half squared error of ``y_hat = w_eff x + bias`` under ``x ~ N(0, I)``."""
    if w_eff.shape != spec.w0.shape:
        raise ValidationError(f"w_eff shape {w_eff.shape} does not match the teacher {spec.w0.shape}")
    diff = w_eff - spec.target_weight
    loss = 0.5 * float(np.sum(diff * diff))
    if bias is not None:
        loss += 0.5 * float(np.sum(bias * bias))
    return loss + 0.5 * spec.d_out * spec.noise_std ** 2


def static_floor(spec: TeacherSpec, init: InitKind, rank: int) -> float:
    """Smallest population loss a fixed rank-``rank`` adapter can reach on ``spec``.

    A LoRA-initialized adapter trains ``w0 + BA``; the best it can do is the
    rank-``rank`` truncation of ``delta_star``. A PiSSA-initialized one trains
    ``residual + BA`` where the trainable target is ``top_rank(w0) + delta_star``.
    """
    if init is InitKind.LORA:
        target = spec.delta_star
    elif init is InitKind.PISSA:
        target = truncate(svd(spec.w0), rank) + spec.delta_star
    else:
        raise ValidationError(f"no static floor for initialization {init!r}")
    tail = best_rank_k_error(target, rank)
    return 0.5 * tail * tail + 0.5 * spec.d_out * spec.noise_std ** 2
