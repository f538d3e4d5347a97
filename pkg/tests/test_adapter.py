# tests/test_adapter.py
import numpy as np
import pytest

from srlora_tools.adapter import (
    NO_DIRECTION, InitKind, backward, direction_pair, effective_weight, forward, lora_init, pissa_init,
)
from srlora_tools.errors import ShapeError, ValidationError
from srlora_tools.linalg import gaussian, relative_error, svd, truncate
from srlora_tools.verify import check_adapter_gradients


@pytest.mark.parametrize("rank,alpha", [(1, 1.0), (3, 3.0), (4, 16.0), (8, 0.5)])
def test_pissa_preserves_the_pretrained_weight(w0, rank, alpha):
    layer = pissa_init(w0, rank, alpha)
    assert relative_error(effective_weight(layer), w0) < 1e-12
    assert layer.p_r == rank
    assert layer.slot_meta == list(range(rank))
    assert layer.init_kind is InitKind.PISSA


def test_pissa_adapter_holds_the_top_directions(w0):
    layer = pissa_init(w0, 3, 6.0)
    adapter = layer.scale * (layer.b @ layer.a)
    np.testing.assert_allclose(adapter, truncate(svd(w0), 3), atol=1e-12)


def test_pissa_rank_and_alpha_checks(w0):
    with pytest.raises(ValidationError):
        pissa_init(w0, 0, 1.0)
    with pytest.raises(ValidationError):
        pissa_init(w0, 9, 1.0)
    with pytest.raises(ValidationError):
        pissa_init(w0, 2, 0.0)


def test_lora_init_starts_at_the_pretrained_weight(w0, rng):
    layer = lora_init(w0, 4, 4.0, rng.derive(5))
    np.testing.assert_array_equal(effective_weight(layer), w0)
    np.testing.assert_array_equal(layer.b, np.zeros((12, 4)))
    assert layer.p_r == 0
    assert layer.slot_meta == [NO_DIRECTION] * 4
    again = lora_init(w0, 4, 4.0, rng.derive(5))
    np.testing.assert_array_equal(layer.a, again.a)


def test_direction_pair_rebuilds_a_scaled_singular_pair(w0):
    factors = svd(w0)
    column, row = direction_pair(factors, 2, fold=0.5)
    expected = 0.25 * factors.s[2] * np.outer(factors.u[:, 2], factors.v[:, 2])
    np.testing.assert_allclose(np.outer(column, row), expected, atol=1e-12)


def test_forward_matches_the_materialized_weight(w0, rng):
    layer = pissa_init(w0, 4, 2.0)
    layer.b += gaussian(rng.derive(6), 12, 4, 0.0, 0.1)
    x = gaussian(rng.derive(7), 8, 5)
    np.testing.assert_allclose(forward(layer, x), effective_weight(layer) @ x, atol=1e-12)


def test_forward_and_backward_check_shapes(w0):
    layer = pissa_init(w0, 2, 2.0)
    with pytest.raises(ShapeError):
        forward(layer, np.zeros((7, 3)))
    with pytest.raises(ShapeError):
        backward(layer, np.zeros((8, 3)), np.zeros((12, 4)))


def test_backward_closed_form(w0, rng):
    layer = pissa_init(w0, 3, 6.0)
    x = gaussian(rng.derive(8), 8, 4)
    g = gaussian(rng.derive(9), 12, 4)
    grads = backward(layer, x, g)
    s = layer.scale
    np.testing.assert_allclose(grads.d_b, s * g @ x.T @ layer.a.T, atol=1e-12)
    np.testing.assert_allclose(grads.d_a, s * layer.b.T @ g @ x.T, atol=1e-12)
    np.testing.assert_allclose(grads.d_x, effective_weight(layer).T @ g, atol=1e-12)


@pytest.mark.parametrize("init", ["pissa", "lora"])
def test_backward_agrees_with_finite_differences(w0, rng, init):
    if init == "pissa":
        layer = pissa_init(w0, 4, 8.0)
    else:
        layer = lora_init(w0, 4, 8.0, rng.derive(10))
        layer.b += gaussian(rng.derive(11), 12, 4, 0.0, 0.2)
    x = gaussian(rng.derive(12), 8, 3)
    g = gaussian(rng.derive(13), 12, 3)
    results = check_adapter_gradients(layer, x, g)
    assert [r.name for r in results] == ["b", "a", "x"]
    for result in results:
        assert result.passed, f"{result.name}: {result.max_rel_error:.3e}"
