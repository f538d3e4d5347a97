# srlora_tools/model/model_types.py
"""
Types for small feed-forward networks built from LoRA-adapted layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np

from ..adapter import LayerGrads, LoraLinear, effective_weight
from ..errors import ShapeError, ValidationError
from ..importance import ImportanceState
from ..linalg import Matrix


class Activation(Enum):
    RELU = "relu"
    IDENTITY = "identity"


class LossKind(Enum):
    MSE = "mse"
    SOFTMAX_CROSS_ENTROPY = "softmax_cross_entropy"


@dataclass
class NetLayer:
    """One layer: either an adapter (``lora``) or a frozen dense weight (``dense``), plus a trainable bias."""
    bias: Matrix  # m x 1
    activation: Activation = Activation.IDENTITY
    lora: Optional[LoraLinear] = None
    dense: Optional[Matrix] = None
    importance: Optional[ImportanceState] = None

    def __post_init__(self):
        if (self.lora is None) == (self.dense is None):
            raise ValidationError("a layer holds exactly one of an adapter or a dense weight")
        if self.lora is not None and self.importance is None:
            raise ValidationError("an adapted layer needs an importance state")
        if self.bias.shape != (self.out_features, 1):
            raise ShapeError("layer bias", (self.out_features, 1), tuple(self.bias.shape))

    @property
    def adapted(self) -> bool:
        return self.lora is not None

    @property
    def in_features(self) -> int:
        return self.lora.in_features if self.lora is not None else int(self.dense.shape[1])

    @property
    def out_features(self) -> int:
        return self.lora.out_features if self.lora is not None else int(self.dense.shape[0])

    @property
    def trainable_count(self) -> int:
        adapter = self.lora.trainable_count if self.lora is not None else 0
        return adapter + int(self.bias.size)

    def weight(self) -> Matrix:
        """Materialized effective weight."""
        return effective_weight(self.lora) if self.lora is not None else self.dense


@dataclass
class SrloraNet:
    """Ordered layers; ``version`` changes whenever parameters do, invalidating forward caches."""
    layers: List[NetLayer] = field(default_factory=list)
    version: int = 0

    def __post_init__(self):
        if not self.layers:
            raise ValidationError("a network needs at least one layer")
        for i in range(1, len(self.layers)):
            prev, cur = self.layers[i - 1], self.layers[i]
            if prev.out_features != cur.in_features:
                raise ShapeError(
                    f"layer chain {i - 1}->{i}",
                    (prev.out_features, prev.in_features),
                    (cur.out_features, cur.in_features),
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_features

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_features

    def adapted_layers(self) -> Iterator[Tuple[int, NetLayer]]:
        for layer_id, layer in enumerate(self.layers):
            if layer.adapted:
                yield layer_id, layer

    def trainable_parameter_count(self) -> int:
        return sum(layer.trainable_count for layer in self.layers)

    def touch(self) -> None:
        """Record a parameter change."""
        self.version += 1


@dataclass(frozen=True)
class ForwardCache:
    """Per-layer inputs and pre-activations from ``net_forward``."""
    version: int
    inputs: Tuple[Matrix, ...]
    pre_activations: Tuple[Matrix, ...]
    output: Matrix

    @property
    def batch_size(self) -> int:
        return int(self.output.shape[1])


@dataclass(frozen=True)
class NetGrads:
    """``adapter[i]`` is ``None`` for non-adapted layers; ``bias[i]`` is ``m x 1``."""
    adapter: Tuple[Optional[LayerGrads], ...]
    bias: Tuple[Matrix, ...]
    d_input: Matrix

    def max_abs(self) -> float:
        """Largest gradient magnitude; NaN when any entry is NaN."""
        values = [np.max(np.abs(g)) for g in self.bias if g.size]
        for grads in self.adapter:
            if grads is not None:
                values.extend([np.max(np.abs(grads.d_b)), np.max(np.abs(grads.d_a))])
        return float(np.max(values, initial=0.0))
