"""
LoRA-adapted linear layer.
"""

from .adapter_types import NO_DIRECTION, InitKind, LayerGrads, LoraLinear
from .lora_linear import (
    backward, direction_pair, effective_weight, forward, lora_init, pissa_init,
)

__all__ = [
    "NO_DIRECTION", "InitKind", "LayerGrads", "LoraLinear",
    "backward", "direction_pair", "effective_weight", "forward", "lora_init", "pissa_init",
]
