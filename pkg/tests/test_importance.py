# tests/test_importance.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srlora_tools.adapter import LayerGrads, pissa_init
from srlora_tools.errors import ShapeError, ValidationError
from srlora_tools.importance import (
    ImportanceState, ema_update, param_score, reset_slots, sensitivity, slot_scores,
)
from srlora_tools.linalg import Rng, gaussian


def _grads(layer, rng):
    return LayerGrads(
        d_b=gaussian(rng.derive(1), *layer.b.shape),
        d_a=gaussian(rng.derive(2), *layer.a.shape),
        d_x=np.zeros((layer.in_features, 1)),
    )


def test_sensitivity_is_entrywise_product_magnitude():
    w = np.array([[1.0, -2.0], [0.5, 0.0]])
    g = np.array([[-3.0, -1.0], [4.0, 7.0]])
    np.testing.assert_array_equal(sensitivity(w, g), [[3.0, 2.0], [2.0, 0.0]])
    with pytest.raises(ShapeError):
        sensitivity(w, np.zeros((2, 3)))


def test_first_and_second_ema_updates(w0, rng):
    layer = pissa_init(w0, 3, 3.0)
    state = ImportanceState.fresh(12, 8, 3, beta1=0.8, beta2=0.6)
    g1, g2 = _grads(layer, rng.derive(1)), _grads(layer, rng.derive(2))

    s1 = ema_update(state, g1, layer)
    sens1 = np.abs(layer.b * g1.d_b)
    np.testing.assert_allclose(s1.i_bar_b, 0.2 * sens1)
    # deviation uses the updated estimate: |sens - 0.2 sens| = 0.8 sens
    np.testing.assert_allclose(s1.u_bar_b, 0.4 * 0.8 * sens1)
    assert s1.step == 1
    np.testing.assert_array_equal(state.i_bar_b, np.zeros((12, 3)))

    s2 = ema_update(s1, g2, layer)
    sens2 = np.abs(layer.a * g2.d_a)
    i2 = 0.8 * s1.i_bar_a + 0.2 * sens2
    np.testing.assert_allclose(s2.i_bar_a, i2)
    np.testing.assert_allclose(s2.u_bar_a, 0.6 * s1.u_bar_a + 0.4 * np.abs(sens2 - i2))
    assert s2.step == 2


def test_ema_update_rejects_mismatched_state(w0, rng):
    layer = pissa_init(w0, 3, 3.0)
    with pytest.raises(ShapeError):
        ema_update(ImportanceState.fresh(12, 8, 2), _grads(layer, rng), layer)


def test_slot_score_is_column_mean_plus_row_mean():
    state = ImportanceState(
        i_bar_b=np.array([[1.0, 2.0], [3.0, 4.0]]),
        u_bar_b=np.array([[1.0, 1.0], [1.0, 0.5]]),
        i_bar_a=np.array([[2.0, 0.0, 1.0], [1.0, 1.0, 1.0]]),
        u_bar_a=np.array([[1.0, 1.0, 1.0], [3.0, 0.0, 3.0]]),
    )
    score_b, score_a = param_score(state)
    np.testing.assert_array_equal(score_b, [[1.0, 2.0], [3.0, 2.0]])
    np.testing.assert_array_equal(score_a, [[2.0, 0.0, 1.0], [3.0, 0.0, 3.0]])
    np.testing.assert_allclose(slot_scores(state).scores, [2.0 + 1.0, 2.0 + 2.0])


def test_reset_slots_only_touches_the_given_slots(w0, rng):
    layer = pissa_init(w0, 4, 4.0)
    state = ema_update(ImportanceState.fresh(12, 8, 4), _grads(layer, rng), layer)
    reset = reset_slots(state, [1, 3])
    for name in ("i_bar_b", "u_bar_b"):
        np.testing.assert_array_equal(getattr(reset, name)[:, [1, 3]], 0.0)
        np.testing.assert_array_equal(getattr(reset, name)[:, [0, 2]], getattr(state, name)[:, [0, 2]])
    for name in ("i_bar_a", "u_bar_a"):
        np.testing.assert_array_equal(getattr(reset, name)[[1, 3], :], 0.0)
        np.testing.assert_array_equal(getattr(reset, name)[[0, 2], :], getattr(state, name)[[0, 2], :])
    assert reset.step == state.step
    assert reset_slots(state, []) is state
    with pytest.raises(ValidationError):
        reset_slots(state, [4])


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.1])
def test_fresh_state_rejects_bad_betas(beta):
    with pytest.raises(ValidationError):
        ImportanceState.fresh(3, 3, 1, beta1=beta)


def _constant_grads(layer, c):
    layer.b[:] = 1.0
    layer.a[:] = 1.0
    return LayerGrads(
        d_b=np.full(layer.b.shape, c), d_a=np.full(layer.a.shape, c), d_x=np.zeros((layer.in_features, 1))
    )


def test_first_update_from_zero_state(w0):
    layer = pissa_init(w0, 2, 2.0)
    state = ema_update(ImportanceState.fresh(12, 8, 2), _constant_grads(layer, 1.0), layer)
    np.testing.assert_allclose(state.i_bar_b, 0.15)
    np.testing.assert_allclose(state.i_bar_a, 0.15)


@pytest.mark.parametrize("c", [0.0, 0.3, 2.5])
def test_constant_input_is_a_geometric_series(w0, c):
    layer = pissa_init(w0, 2, 2.0)
    grads = _constant_grads(layer, c)
    state = ImportanceState.fresh(12, 8, 2, beta1=0.85)
    for t in range(1, 16):
        state = ema_update(state, grads, layer)
        np.testing.assert_allclose(state.i_bar_b, c * (1.0 - 0.85 ** t), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(state.i_bar_a, c * (1.0 - 0.85 ** t), rtol=1e-12, atol=1e-15)


def test_constant_input_contracts_towards_it(w0):
    layer = pissa_init(w0, 2, 2.0)
    c = 1.25
    grads = _constant_grads(layer, c)
    i0_b = gaussian(Rng(3), 12, 2, 4.0, 1.0)
    i0_a = gaussian(Rng(4), 2, 8, -1.0, 1.0)
    state = ImportanceState(
        i_bar_b=i0_b, u_bar_b=np.zeros((12, 2)), i_bar_a=i0_a, u_bar_a=np.zeros((2, 8)), beta1=0.7,
    )
    for t in range(1, 11):
        state = ema_update(state, grads, layer)
        np.testing.assert_allclose(np.abs(state.i_bar_b - c), 0.7 ** t * np.abs(i0_b - c), rtol=1e-10)
        np.testing.assert_allclose(np.abs(state.i_bar_a - c), 0.7 ** t * np.abs(i0_a - c), rtol=1e-10)


def test_ten_steps_match_a_scalar_recurrence(w0, rng):
    layer = pissa_init(w0, 3, 3.0)
    state = ImportanceState.fresh(12, 8, 3, beta1=0.85, beta2=0.6)
    i_ref, u_ref = 0.0, 0.0
    for step in range(10):
        grads = _grads(layer, rng.derive(100 + step))
        state = ema_update(state, grads, layer)
        current = abs(float(layer.a[1, 5]) * float(grads.d_a[1, 5]))
        i_ref = 0.85 * i_ref + 0.15 * current
        u_ref = 0.6 * u_ref + 0.4 * abs(current - i_ref)
    assert state.step == 10
    assert state.i_bar_a[1, 5] == pytest.approx(i_ref, rel=1e-12)
    assert state.u_bar_a[1, 5] == pytest.approx(u_ref, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), ops=st.lists(st.sampled_from(["update", "reset"]), min_size=1, max_size=12))
def test_statistics_stay_non_negative(seed, ops):
    rng = Rng(seed)
    layer = pissa_init(gaussian(rng.derive(0), 6, 5), 3, 3.0)
    state = ImportanceState.fresh(6, 5, 3)
    for k, op in enumerate(ops):
        if op == "update":
            state = ema_update(state, _grads(layer, rng.derive(k + 1)), layer)
        else:
            state = reset_slots(state, [k % 3])
        for name in ("i_bar_b", "u_bar_b", "i_bar_a", "u_bar_a"):
            assert np.all(getattr(state, name) >= 0.0)
        score_b, score_a = param_score(state)
        assert np.all(score_b >= 0.0) and np.all(score_a >= 0.0)
        assert np.all(slot_scores(state).scores >= 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.sampled_from([-8.0, -0.5, 0.25, 2.0, 4.0]))
def test_sensitivity_is_scale_covariant(seed, lam):
    rng = Rng(seed)
    w, g = gaussian(rng.derive(1), 4, 3), gaussian(rng.derive(2), 4, 3)
    # powers of two keep the rescaling exact
    np.testing.assert_array_equal(sensitivity(lam * w, g / lam), sensitivity(w, g))


def test_slot_scores_follow_a_slot_permutation(rng):
    state = ImportanceState(
        i_bar_b=np.abs(gaussian(rng.derive(1), 7, 5)), u_bar_b=np.abs(gaussian(rng.derive(2), 7, 5)),
        i_bar_a=np.abs(gaussian(rng.derive(3), 5, 6)), u_bar_a=np.abs(gaussian(rng.derive(4), 5, 6)),
    )
    perm = np.array([3, 0, 4, 1, 2])
    permuted = ImportanceState(
        i_bar_b=state.i_bar_b[:, perm], u_bar_b=state.u_bar_b[:, perm],
        i_bar_a=state.i_bar_a[perm, :], u_bar_a=state.u_bar_a[perm, :],
    )
    np.testing.assert_allclose(slot_scores(permuted).scores, slot_scores(state).scores[perm], rtol=1e-14)


def test_slot_scores_match_a_loop(rng):
    state = ImportanceState(
        i_bar_b=np.abs(gaussian(rng.derive(5), 6, 4)), u_bar_b=np.abs(gaussian(rng.derive(6), 6, 4)),
        i_bar_a=np.abs(gaussian(rng.derive(7), 4, 9)), u_bar_a=np.abs(gaussian(rng.derive(8), 4, 9)),
    )
    expected = []
    for k in range(4):
        col = sum(state.i_bar_b[i, k] * state.u_bar_b[i, k] for i in range(6)) / 6
        row = sum(state.i_bar_a[k, j] * state.u_bar_a[k, j] for j in range(9)) / 9
        expected.append(col + row)
    np.testing.assert_allclose(slot_scores(state).scores, expected, rtol=1e-12)
