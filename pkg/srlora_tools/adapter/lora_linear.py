# srlora_tools/adapter/lora_linear.py
"""
LoRA linear layer: initialization, forward pass and analytic gradients.

Inputs are column-stacked (``n x batch``). The adapter product ``b @ a`` is
never materialized on the forward/backward paths.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..errors import ShapeError, ValidationError
from ..linalg import Matrix, Rng, SvdFactors, gaussian, svd
from .adapter_types import NO_DIRECTION, InitKind, LayerGrads, LoraLinear


def _check_rank(w0: Matrix, rank: int, alpha: float) -> None:
    d = min(w0.shape)
    if rank < 1 or rank > d:
        raise ValidationError(f"rank must be in [1, {d}] for a {w0.shape[0]}x{w0.shape[1]} weight, got {rank}")
    if alpha <= 0:
        raise ValidationError(f"alpha must be > 0, got {alpha}")


def direction_pair(factors: SvdFactors, index: int, fold: float) -> Tuple[np.ndarray, np.ndarray]:
    """Column of ``b`` and row of ``a`` for singular index ``index``: ``u_i·√σ_i·fold`` and ``√σ_i·fold·v_iᵀ``."""
    root = np.sqrt(factors.s[index]) * fold
    return factors.u[:, index] * root, factors.v[:, index] * root


def pissa_init(w0: Matrix, rank: int, alpha: float, factors: Optional[SvdFactors] = None) -> LoraLinear:
    """Top-``rank`` singular directions into ``b``/``a``; the residual becomes the frozen weight."""
    _check_rank(w0, rank, alpha)
    factors = svd(w0) if factors is None else factors
    fold = float(np.sqrt(rank / alpha))
    root = np.sqrt(factors.s[:rank]) * fold
    b = np.ascontiguousarray(factors.u[:, :rank] * root)
    a = np.ascontiguousarray(root[:, None] * factors.v[:, :rank].T)
    scale = alpha / rank
    w = w0 - scale * (b @ a)
    return LoraLinear(
        w=w,
        svd0=factors,
        b=b,
        a=a,
        rank=rank,
        alpha=float(alpha),
        p_r=rank,
        slot_meta=list(range(rank)),
        init_kind=InitKind.PISSA,
    )


def lora_init(
    w0: Matrix,
    rank: int,
    alpha: float,
    rng: Rng,
    a_std: Optional[float] = None,
    factors: Optional[SvdFactors] = None,
) -> LoraLinear:
    """Classic LoRA start: ``a ~ N(0, a_std²)``, ``b = 0``, frozen weight ``w0``."""
    _check_rank(w0, rank, alpha)
    m, n = w0.shape
    a_std = 1.0 / np.sqrt(n) if a_std is None else a_std
    factors = svd(w0) if factors is None else factors
    return LoraLinear(
        w=np.array(w0, dtype=np.float64, copy=True),
        svd0=factors,
        b=np.zeros((m, rank), dtype=np.float64),
        a=gaussian(rng, rank, n, 0.0, a_std),
        rank=rank,
        alpha=float(alpha),
        p_r=0,
        slot_meta=[NO_DIRECTION] * rank,
        init_kind=InitKind.LORA,
    )


def forward(layer: LoraLinear, x: Matrix) -> Matrix:
    """``w @ x + scale * b @ (a @ x)``."""
    if x.ndim != 2 or x.shape[0] != layer.in_features:
        raise ShapeError("forward", (layer.out_features, layer.in_features), tuple(x.shape))
    return layer.w @ x + layer.scale * (layer.b @ (layer.a @ x))


def backward(layer: LoraLinear, x: Matrix, d_y: Matrix) -> LayerGrads:
    """Exact gradients for any scalar loss whose output gradient is ``d_y``."""
    if x.ndim != 2 or x.shape[0] != layer.in_features:
        raise ShapeError("backward", (layer.out_features, layer.in_features), tuple(x.shape))
    if d_y.ndim != 2 or d_y.shape != (layer.out_features, x.shape[1]):
        raise ShapeError("backward", (layer.out_features, x.shape[1]), tuple(d_y.shape), detail="d_y")
    s = layer.scale
    ax = layer.a @ x
    bt_dy = layer.b.T @ d_y
    d_b = s * (d_y @ ax.T)
    d_a = s * (bt_dy @ x.T)
    d_x = layer.w.T @ d_y + s * (layer.a.T @ bt_dy)
    return LayerGrads(d_b=d_b, d_a=d_a, d_x=d_x)


def effective_weight(layer: LoraLinear) -> Matrix:
    """Materialized ``w + scale * b @ a`` (tests and reports only)."""
    return layer.w + layer.scale * (layer.b @ layer.a)
