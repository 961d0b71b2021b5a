import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kqlearn.kernel import (DimensionError, KernelConfig, SolverError, cross_matrix, gram_matrix,
                            kernel_eval, solve_gram)


def test_identical_points_give_one():
    cfg = KernelConfig((0.3, 2.0))
    assert kernel_eval(cfg, [0.4, -1.0], [0.4, -1.0]) == 1.0


def test_unit_offset_closed_form():
    cfg = KernelConfig((1.0, 1.0))
    assert kernel_eval(cfg, [1.0, 0.0], [0.0, 0.0]) == pytest.approx(np.exp(-0.5), abs=1e-15)
    assert kernel_eval(cfg, [1.0, 0.0], [0.0, 0.0]) == pytest.approx(0.60653, abs=1e-5)


def test_pendulum_bandwidths_accepted():
    cfg = KernelConfig((0.5, 0.5, 2.0, 0.5))
    assert cfg.dim == 4
    assert 0 < kernel_eval(cfg, np.zeros(4), np.ones(4)) < 1


@pytest.mark.parametrize("bw,jitter", [((1.0, 0.0), 1e-8), ((1.0, -1.0), 1e-8), ((1.0,), -1e-9),
                                       ((1.0,), 2e-4), ((), 1e-8), ((np.inf,), 1e-8)])
def test_invalid_configs_rejected(bw, jitter):
    with pytest.raises(ValueError):
        KernelConfig(bw, jitter)


def test_dimension_mismatch():
    cfg = KernelConfig((1.0, 1.0))
    with pytest.raises(DimensionError):
        kernel_eval(cfg, [0.0], [0.0, 1.0])
    with pytest.raises(DimensionError):
        gram_matrix(cfg, np.zeros((3, 3)))


def test_gram_examples():
    cfg = KernelConfig((0.7, 1.3))
    assert gram_matrix(cfg, [[0.2, 0.1]]).tolist() == [[1.0]]
    assert np.array_equal(gram_matrix(cfg, [[0.2, 0.1], [0.2, 0.1]]), np.ones((2, 2)))
    assert gram_matrix(cfg, np.zeros((0, 2))).shape == (0, 0)


def test_random_gram_psd_small():
    rng = np.random.default_rng(1)
    cfg = KernelConfig((0.5, 0.8, 1.1))
    K = gram_matrix(cfg, rng.normal(size=(5, 3)))
    assert np.linalg.eigvalsh(K).min() >= -1e-10


@pytest.mark.parametrize("M", [1, 2, 8, 16, 32, 64])
def test_gram_psd_symmetric_unit_diagonal(M):
    rng = np.random.default_rng(M)
    cfg = KernelConfig(tuple(rng.uniform(0.1, 2.0, 3)))
    # clustered points make the matrix nearly singular, the hard case for PSD
    D = rng.normal(scale=0.2, size=(M, 3))
    K = gram_matrix(cfg, D)
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(K) == 1.0)
    assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_cross_matrix_examples():
    rng = np.random.default_rng(2)
    cfg = KernelConfig((0.6, 1.4))
    D, E = rng.normal(size=(3, 2)), rng.normal(size=(4, 2))
    C = cross_matrix(cfg, D, E)
    assert C.shape == (3, 4)
    for i in range(3):
        for j in range(4):
            assert C[i, j] == pytest.approx(kernel_eval(cfg, D[i], E[j]), abs=1e-15)
    assert np.array_equal(cross_matrix(cfg, D, D), gram_matrix(cfg, D))
    assert cross_matrix(cfg, np.zeros((0, 2)), E).shape == (0, 4)


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3),
       st.lists(st.floats(0.05, 5), min_size=3, max_size=3))
def test_symmetry_and_bounds(x, y, bw):
    cfg = KernelConfig(tuple(bw))
    k = kernel_eval(cfg, x, y)
    assert k == kernel_eval(cfg, y, x)
    assert 0 <= k <= 1
    if x == y:
        assert k == 1.0


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=2, max_size=2),
       st.lists(st.floats(0.1, 3), min_size=2, max_size=2), st.floats(0.1, 10))
def test_scale_invariance(x, y, bw, c):
    base = kernel_eval(KernelConfig(tuple(bw)), x, y)
    scaled = kernel_eval(KernelConfig(tuple(c * b for b in bw)), np.multiply(c, x), np.multiply(c, y))
    assert scaled == pytest.approx(base, rel=1e-9, abs=1e-300)


def test_solve_single_atom():
    cfg = KernelConfig((1.0,), jitter=1e-6)
    x = solve_gram(cfg, [[0.3]], np.array([2.0]))
    assert x[0] == pytest.approx(2.0 / (1.0 + 1e-6), rel=1e-14)


def test_solve_matches_dense_inverse():
    cfg = KernelConfig((0.5, 0.5))
    D = np.array([[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]])
    rhs = np.array([[1.0, 2.0], [-0.5, 0.0], [3.0, 1.0]])
    K = gram_matrix(cfg, D) + cfg.jitter * np.eye(3)
    x = solve_gram(cfg, D, rhs)
    assert np.allclose(x, np.linalg.inv(K) @ rhs, atol=1e-8, rtol=0)
    assert np.linalg.norm(K @ x - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_duplicate_atoms_without_jitter_fail():
    cfg = KernelConfig((1.0, 1.0), jitter=0.0)
    with pytest.raises(SolverError) as info:
        solve_gram(cfg, [[0.1, 0.2], [0.1, 0.2]], np.array([1.0, 1.0]))
    assert info.value.condition > 0


def test_solve_rhs_row_mismatch():
    cfg = KernelConfig((1.0,))
    with pytest.raises(ValueError):
        solve_gram(cfg, [[0.0], [1.0]], np.ones(3))
