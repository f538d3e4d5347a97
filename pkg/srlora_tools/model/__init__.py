"""
Feed-forward networks of LoRA-adapted layers, with losses.
"""

from .model_types import Activation, ForwardCache, LossKind, NetGrads, NetLayer, SrloraNet
from .losses import accuracy, check_one_hot, loss_and_grad
from .network import make_layer, net_backward, net_forward, trainable_parameter_count

__all__ = [
    "Activation", "ForwardCache", "LossKind", "NetGrads", "NetLayer", "SrloraNet",
    "accuracy", "check_one_hot", "loss_and_grad",
    "make_layer", "net_backward", "net_forward", "trainable_parameter_count",
]
