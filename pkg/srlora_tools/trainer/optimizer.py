# srlora_tools/trainer/optimizer.py
"""
SGD with momentum over named parameters.

``v <- momentum * v + g``, ``p <- p - learning_rate * v``; parameters are
updated in place so layers keep ownership of their arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable

import numpy as np

from ..errors import ShapeError, ValidationError
from ..linalg import Matrix, validate_indices
from ..model import NetGrads, SrloraNet


@dataclass
class SgdMomentum:
    learning_rate: float
    momentum: float = 0.9
    velocities: Dict[str, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValidationError(f"momentum must be in [0, 1), got {self.momentum}")


def param_name(layer_id: int, kind: str) -> str:
    return f"layer{layer_id}.{kind}"


def net_parameters(net: SrloraNet) -> Dict[str, Matrix]:
    """Trainable arrays by name (``layer{i}.b``, ``layer{i}.a``, ``layer{i}.bias``)."""
    params: Dict[str, Matrix] = {}
    for layer_id, layer in enumerate(net.layers):
        if layer.lora is not None:
            params[param_name(layer_id, "b")] = layer.lora.b
            params[param_name(layer_id, "a")] = layer.lora.a
        params[param_name(layer_id, "bias")] = layer.bias
    return params


def net_gradients(grads: NetGrads) -> Dict[str, Matrix]:
    named: Dict[str, Matrix] = {}
    for layer_id, (adapter, bias) in enumerate(zip(grads.adapter, grads.bias)):
        if adapter is not None:
            named[param_name(layer_id, "b")] = adapter.d_b
            named[param_name(layer_id, "a")] = adapter.d_a
        named[param_name(layer_id, "bias")] = bias
    return named


def apply_step(opt: SgdMomentum, params: Dict[str, Matrix], grads: Dict[str, Matrix]) -> None:
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"apply_step {name}", tuple(p.shape), tuple(g.shape))
        v = opt.velocities.get(name)
        if v is None:
            v = opt.velocities[name] = np.zeros_like(p)
        v *= opt.momentum
        v += g
        p -= opt.learning_rate * v


def zero_slots(opt: SgdMomentum, layer_id: int, slots: Iterable[int]) -> None:
    """Forget the momentum of recycled slots."""
    v_b = opt.velocities.get(param_name(layer_id, "b"))
    v_a = opt.velocities.get(param_name(layer_id, "a"))
    if v_b is None or v_a is None:
        return
    idx = list(validate_indices(slots, v_b.shape[1]))
    v_b[:, idx] = 0.0
    v_a[idx, :] = 0.0
