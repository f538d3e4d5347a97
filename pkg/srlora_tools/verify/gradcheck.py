# srlora_tools/verify/gradcheck.py
"""
Central finite-difference gradient checks.

Each trainable entry is perturbed by ``+h`` and ``-h`` in place and
restored; the numeric derivative is ``(f(+h) - f(-h)) / 2h``. Entries are
compared by ``|analytic - numeric| / max(|analytic|, floor)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from ..adapter import LoraLinear, backward, forward
from ..linalg import Matrix
from ..model import LossKind, SrloraNet, loss_and_grad, net_backward, net_forward
from ..trainer import net_gradients, net_parameters

DEFAULT_STEP = 1e-6
DEFAULT_FLOOR = 1e-8


@dataclass(frozen=True)
class GradCheckResult:
    name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def central_difference(loss: Callable[[], float], param: Matrix, h: float = DEFAULT_STEP) -> Matrix:
    """Numeric gradient of ``loss()`` w.r.t. ``param`` (perturbed in place, restored exactly)."""
    grad = np.zeros_like(param)
    for idx in np.ndindex(*param.shape):
        original = param[idx]
        param[idx] = original + h
        plus = loss()
        param[idx] = original - h
        minus = loss()
        param[idx] = original
        grad[idx] = (plus - minus) / (2.0 * h)
    return grad


def max_relative_error(analytic: Matrix, numeric: Matrix, floor: float = DEFAULT_FLOOR) -> float:
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.abs(analytic), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_adapter_gradients(
    layer: LoraLinear,
    x: Matrix,
    g: Matrix,
    h: float = DEFAULT_STEP,
    tolerance: float = 1e-5,
) -> List[GradCheckResult]:
    """Check ``backward`` against the scalar ``sum(g * forward(layer, x))``."""
    analytic = backward(layer, x, g)
    x = np.array(x, copy=True)

    def loss() -> float:
        return float(np.sum(g * forward(layer, x)))

    return [
        GradCheckResult("b", max_relative_error(analytic.d_b, central_difference(loss, layer.b, h)), tolerance),
        GradCheckResult("a", max_relative_error(analytic.d_a, central_difference(loss, layer.a, h)), tolerance),
        GradCheckResult("x", max_relative_error(analytic.d_x, central_difference(loss, x, h)), tolerance),
    ]


def check_net_gradients(
    net: SrloraNet,
    x: Matrix,
    y: Matrix,
    kind: LossKind = LossKind.MSE,
    h: float = DEFAULT_STEP,
    tolerance: float = 1e-5,
) -> List[GradCheckResult]:
    """End-to-end check of ``net_backward`` for every trainable parameter."""
    y_hat, cache = net_forward(net, x)
    _, d_out = loss_and_grad(kind, y_hat, y)
    grads = net_backward(net, cache, d_out)
    analytic = net_gradients(grads)

    def loss() -> float:
        out, _ = net_forward(net, x)
        return loss_and_grad(kind, out, y)[0]

    results = [
        GradCheckResult(name, max_relative_error(analytic[name], central_difference(loss, param, h)), tolerance)
        for name, param in net_parameters(net).items()
    ]
    net.touch()
    return results


def check_loss_gradient(
    kind: LossKind,
    y_hat: Matrix,
    y: Matrix,
    h: float = DEFAULT_STEP,
    tolerance: float = 1e-6,
) -> GradCheckResult:
    y_hat = np.array(y_hat, copy=True)
    _, analytic = loss_and_grad(kind, y_hat, y)
    numeric = central_difference(lambda: loss_and_grad(kind, y_hat, y)[0], y_hat, h)
    return GradCheckResult(kind.value, max_relative_error(analytic, numeric), tolerance)
