# srlora_tools/model/network.py
"""
Forward and backward passes through an ``SrloraNet`` and a layer factory.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from ..adapter import InitKind, LayerGrads, backward, forward, lora_init, pissa_init
from ..errors import ShapeError, ValidationError
from ..importance import ImportanceState
from ..linalg import Matrix, Rng, SvdFactors
from .model_types import Activation, ForwardCache, NetGrads, NetLayer, SrloraNet


def _activate(activation: Activation, z: Matrix) -> Matrix:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    return z


def _activation_grad(activation: Activation, z: Matrix, d_h: Matrix) -> Matrix:
    if activation is Activation.RELU:
        return d_h * (z > 0.0)
    return d_h


def net_forward(net: SrloraNet, x: Matrix) -> Tuple[Matrix, ForwardCache]:
    """Compose the layers on a column-stacked batch ``x`` (``input_dim x batch``)."""
    if x.ndim != 2 or x.shape[0] != net.input_dim:
        raise ShapeError("net_forward", tuple(x.shape), detail=f"expected {net.input_dim} input rows")
    inputs: List[Matrix] = []
    pre: List[Matrix] = []
    h = x
    for layer in net.layers:
        inputs.append(h)
        if layer.lora is not None:
            z = forward(layer.lora, h)
        else:
            z = layer.dense @ h
        z = z + layer.bias
        pre.append(z)
        h = _activate(layer.activation, z)
    return h, ForwardCache(version=net.version, inputs=tuple(inputs), pre_activations=tuple(pre), output=h)


def net_backward(net: SrloraNet, cache: ForwardCache, d_out: Matrix) -> NetGrads:
    """Gradients of every trainable (``b``, ``a``, biases) given ``d loss / d output``."""
    if cache.version != net.version:
        raise ValidationError(
            f"stale forward cache: taken at version {cache.version}, network is at {net.version}"
        )
    if d_out.shape != cache.output.shape:
        raise ShapeError("net_backward", tuple(cache.output.shape), tuple(d_out.shape))

    n_layers = len(net.layers)
    adapter: List[Optional[LayerGrads]] = [None] * n_layers
    bias: List[Matrix] = [np.zeros((0, 1))] * n_layers
    d_h = d_out
    for i in reversed(range(n_layers)):
        layer = net.layers[i]
        d_z = _activation_grad(layer.activation, cache.pre_activations[i], d_h)
        bias[i] = d_z.sum(axis=1, keepdims=True)
        if layer.lora is not None:
            grads = backward(layer.lora, cache.inputs[i], d_z)
            adapter[i] = grads
            d_h = grads.d_x
        else:
            d_h = layer.dense.T @ d_z
    return NetGrads(adapter=tuple(adapter), bias=tuple(bias), d_input=d_h)


def make_layer(
    w0: Matrix,
    activation: Activation,
    adapted: bool = True,
    rank: int = 8,
    alpha: float = 8.0,
    init_kind: InitKind = InitKind.PISSA,
    rng: Optional[Rng] = None,
    a_std: Optional[float] = None,
    beta1: float = 0.85,
    beta2: float = 0.85,
    factors: Optional[SvdFactors] = None,
) -> NetLayer:
    """Wrap a pretrained weight ``w0`` as a network layer with a zero bias."""
    bias = np.zeros((w0.shape[0], 1), dtype=np.float64)
    if not adapted:
        return NetLayer(bias=bias, activation=activation, dense=np.array(w0, dtype=np.float64, copy=True))
    if init_kind is InitKind.PISSA:
        lora = pissa_init(w0, rank, alpha, factors=factors)
    else:
        if rng is None:
            raise ValidationError("LoRA initialization needs a random stream")
        lora = lora_init(w0, rank, alpha, rng, a_std=a_std, factors=factors)
    importance = ImportanceState.fresh(lora.out_features, lora.in_features, rank, beta1, beta2)
    return NetLayer(bias=bias, activation=activation, lora=lora, importance=importance)


def trainable_parameter_count(net: SrloraNet) -> int:
    return net.trainable_parameter_count()
