# tests/test_linalg.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srlora_tools.errors import CheckpointError, ConvergenceError, ShapeError, ValidationError
from srlora_tools.linalg import (
    Rng, as_matrix, best_rank_k_error, decode_matrix, encode_matrix, gaussian, matmul,
    orthonormal_columns, relative_error, svd, truncate, validate_indices,
)


# matrix helpers

def test_as_matrix_promotes_vectors_to_rows():
    m = as_matrix([1.0, 2.0, 3.0])
    assert m.shape == (1, 3)
    assert m.dtype == np.float64


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ValidationError):
        as_matrix([[1.0, np.nan]])


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError) as info:
        matmul(np.zeros((3, 4)), np.zeros((5, 2)))
    assert "3x4" in str(info.value)
    assert "5x2" in str(info.value)


def test_relative_error_is_absolute_against_zero():
    assert relative_error(np.full((2, 2), 0.5), np.zeros((2, 2))) == pytest.approx(1.0)


def test_validate_indices_sorts_and_checks_range():
    assert validate_indices([3, 1, 3], 4) == (1, 3)
    with pytest.raises(ValidationError):
        validate_indices([4], 4)


# svd

@pytest.mark.parametrize("shape", [(1, 1), (6, 6), (9, 4), (4, 9), (20, 13)])
def test_svd_reconstructs_and_matches_numpy(shape):
    w = gaussian(Rng(3).derive(*shape), *shape)
    f = svd(w)
    d = min(shape)
    assert f.u.shape == (shape[0], d)
    assert f.v.shape == (shape[1], d)
    assert relative_error(f.reconstruct(), w) < 1e-10
    np.testing.assert_allclose(f.s, np.linalg.svd(w, compute_uv=False), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(f.u.T @ f.u, np.eye(d), atol=1e-10)
    np.testing.assert_allclose(f.v.T @ f.v, np.eye(d), atol=1e-10)


def test_svd_values_are_sorted_and_signs_fixed():
    f = svd(gaussian(Rng(5), 10, 7))
    assert np.all(np.diff(f.s) <= 0)
    assert np.all(f.s >= 0)
    for k in range(f.u.shape[1]):
        column = f.u[:, k]
        assert column[np.argmax(np.abs(column))] > 0


def test_svd_rank_deficient_keeps_orthonormal_factors():
    rng = Rng(11)
    w = gaussian(rng.derive(1), 6, 1) @ gaussian(rng.derive(2), 1, 4)
    f = svd(w)
    assert f.s[0] > 0
    np.testing.assert_allclose(f.s[1:], 0.0, atol=1e-12)
    np.testing.assert_allclose(f.u.T @ f.u, np.eye(4), atol=1e-10)
    assert relative_error(f.reconstruct(), w) < 1e-10


def test_svd_of_zero_matrix():
    f = svd(np.zeros((3, 5)))
    np.testing.assert_array_equal(f.s, np.zeros(3))
    np.testing.assert_allclose(f.reconstruct(), 0.0)


def test_svd_is_deterministic():
    w = gaussian(Rng(8), 7, 5)
    a, b = svd(w), svd(w.copy())
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.s, b.s)


def test_svd_rejects_bad_input():
    with pytest.raises(ValidationError):
        svd(np.array([[1.0, np.inf]]))


def test_svd_sweep_cap_raises_convergence_error():
    with pytest.raises(ConvergenceError) as info:
        svd(gaussian(Rng(2), 12, 12), max_sweeps=1)
    assert info.value.residual > 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 7), n=st.integers(1, 7))
def test_truncation_error_is_the_spectral_tail(seed, m, n):
    w = gaussian(Rng(seed), m, n)
    f = svd(w)
    for k in range(min(m, n) + 1):
        tail = best_rank_k_error(w, k)
        assert tail == pytest.approx(float(np.sqrt(np.sum(f.s[k:] ** 2))), abs=1e-10)
        err = float(np.linalg.norm(w - truncate(f, k)))
        assert err == pytest.approx(tail, rel=1e-8, abs=1e-10)


def test_best_rank_k_error_range():
    with pytest.raises(ValidationError):
        best_rank_k_error(np.eye(3), 4)


# rng

def test_same_keys_give_same_draws():
    a = Rng(42).derive(1, 2).normal(3, 3)
    b = Rng(42, 1, 2).normal(3, 3)
    np.testing.assert_array_equal(a, b)


def test_derived_streams_are_independent():
    root = Rng(42)
    assert not np.array_equal(root.derive(1).normal(4, 4), root.derive(2).normal(4, 4))


def test_rng_state_resumes_stream():
    rng = Rng(9)
    rng.normal(2, 2)
    state = rng.get_state()
    expected = rng.normal(3, 3)
    np.testing.assert_array_equal(Rng.from_state(state).normal(3, 3), expected)


def test_rng_rejects_out_of_range_seed():
    with pytest.raises(ValidationError):
        Rng(-1)
    with pytest.raises(ValidationError):
        Rng(1 << 64)


def test_gaussian_zero_std_is_constant():
    np.testing.assert_array_equal(gaussian(Rng(0), 2, 3, mean=1.5, std=0.0), np.full((2, 3), 1.5))


def test_orthonormal_columns():
    q = orthonormal_columns(Rng(4), 9, 5)
    np.testing.assert_allclose(q.T @ q, np.eye(5), atol=1e-12)
    with pytest.raises(ValidationError):
        orthonormal_columns(Rng(4), 3, 5)


# codec

def test_matrix_record_is_exact_and_reports_next_offset():
    m = gaussian(Rng(1), 3, 4)
    blob = encode_matrix(m) + b"tail"
    decoded, offset = decode_matrix(blob)
    np.testing.assert_array_equal(decoded, m)
    assert blob[offset:] == b"tail"
    assert len(encode_matrix(m)) == 12 + 3 * 4 * 8


def test_matrix_record_rejects_corruption():
    blob = encode_matrix(np.ones((2, 2)))
    with pytest.raises(CheckpointError):
        decode_matrix(b"XXXX" + blob[4:])
    with pytest.raises(CheckpointError):
        decode_matrix(blob[:-1])
    with pytest.raises(CheckpointError):
        decode_matrix(blob[:6])


# properties

def test_matmul_small_cases():
    m = gaussian(Rng(21), 3, 3)
    np.testing.assert_array_equal(matmul(np.eye(3), m), m)
    product = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[5.0], [6.0]]))
    np.testing.assert_array_equal(product, [[17.0], [39.0]])


def test_matmul_matches_a_triple_loop():
    rng = Rng(22)
    a, b = gaussian(rng.derive(1), 5, 4), gaussian(rng.derive(2), 4, 3)
    expected = np.zeros((5, 3))
    for i in range(5):
        for j in range(3):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    np.testing.assert_allclose(matmul(a, b), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_matmul_is_associative(seed):
    rng = Rng(seed).derive(23)
    p, q, r, s = 2 + seed % 5, 3 + seed % 4, 1 + seed % 6, 4
    a, b, c = gaussian(rng.derive(1), p, q), gaussian(rng.derive(2), q, r), gaussian(rng.derive(3), r, s)
    assert relative_error(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) <= 1e-10


def test_gaussian_sample_statistics():
    samples = gaussian(Rng(24), 100, 100)
    assert abs(float(samples.mean())) < 0.05
    assert abs(float(samples.std()) - 1.0) < 0.05
    np.testing.assert_array_equal(gaussian(Rng(24), 100, 100), samples)


def test_diagonal_examples():
    w = np.diag([3.0, 2.0, 1.0])
    f = svd(w)
    np.testing.assert_allclose(f.s, [3.0, 2.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(f.u), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(np.abs(f.v), np.eye(3), atol=1e-12)
    assert best_rank_k_error(w, 2) == pytest.approx(1.0, abs=1e-12)
    assert best_rank_k_error(w, 3) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_array_equal(svd(np.zeros((4, 3))).s, np.zeros(3))


def test_six_by_four_against_eigenvalues():
    w = gaussian(Rng(25), 6, 4)
    f = svd(w)
    assert relative_error(f.reconstruct(), w) <= 1e-10
    oracle = np.sqrt(np.clip(np.linalg.eigvalsh(w.T @ w)[::-1], 0.0, None))
    np.testing.assert_allclose(f.s, oracle, atol=1e-8)


def test_eight_by_eight_tail_against_truncation():
    w = gaussian(Rng(26), 8, 8)
    f = np.linalg.svd(w)
    rebuilt = f[0][:, :3] @ np.diag(f[1][:3]) @ f[2][:3, :]
    assert best_rank_k_error(w, 3) == pytest.approx(float(np.linalg.norm(w - rebuilt)), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 9), n=st.integers(1, 9))
def test_best_rank_k_error_is_non_increasing(seed, m, n):
    w = gaussian(Rng(seed), m, n)
    tails = [best_rank_k_error(w, k) for k in range(min(m, n) + 1)]
    assert all(later <= earlier for earlier, later in zip(tails, tails[1:]))
    assert tails[-1] == pytest.approx(0.0, abs=1e-10)


def _seeded_shapes(count: int):
    rng = Rng(27).generator
    return [(int(rng.integers(1, 13)), int(rng.integers(1, 13))) for _ in range(count)]


def test_svd_invariants_over_many_shapes():
    shapes = _seeded_shapes(120) + [(4, 9), (9, 4), (7, 7)]
    assert any(m < n for m, n in shapes) and any(m > n for m, n in shapes) and any(m == n for m, n in shapes)
    for seed, (m, n) in enumerate(shapes):
        w = gaussian(Rng(seed).derive(28), m, n)
        f = svd(w)
        d = min(m, n)
        assert f.s.shape == (d,)
        assert np.all(f.s >= 0.0) and np.all(np.diff(f.s) <= 0.0), (m, n)
        assert np.linalg.norm(f.u.T @ f.u - np.eye(d)) <= 1e-8, (m, n)
        assert np.linalg.norm(f.v.T @ f.v - np.eye(d)) <= 1e-8, (m, n)
        assert relative_error(f.reconstruct(), w) <= 1e-8, (m, n)
