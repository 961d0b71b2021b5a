import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import brute_eval, random_q, union_dist
from kqlearn.kernel import DimensionError, KernelConfig
from kqlearn.qfunction import (QFunction, action_gradient, append_atoms, dumps, hilbert_dist,
                               hilbert_norm_sq, load_qfunction, loads, q_eval, save_qfunction)

CFG = KernelConfig((0.8, 0.07, 1.0))


def test_empty_q_is_zero():
    Q = QFunction.empty(CFG, 2)
    assert Q.model_order == 0
    assert q_eval(Q, [0.1, 0.0, 0.3]) == 0.0
    assert hilbert_norm_sq(Q) == 0.0


def test_single_atom_value_and_norm():
    Q = QFunction(CFG, 2, [[0.1, 0.01, -0.5]], [2.0])
    assert q_eval(Q, [0.1, 0.01, -0.5]) == 2.0
    assert hilbert_norm_sq(Q) == 4.0


def test_duplicate_atoms_cancel():
    Q = QFunction(CFG, 2, [[0.1, 0.01, -0.5]] * 2, [1.0, -1.0])
    assert hilbert_norm_sq(Q) == 0.0


def test_eval_matches_resummation():
    rng = np.random.default_rng(0)
    for _ in range(20):
        Q = random_q(rng, 4)
        x = rng.uniform(-1, 1, 3)
        assert q_eval(Q, x) == pytest.approx(brute_eval(Q, x), abs=1e-12)


def test_eval_dimension_mismatch():
    Q = QFunction(CFG, 2, [[0.0, 0.0, 0.0]], [1.0])
    with pytest.raises(DimensionError):
        q_eval(Q, [0.0, 0.0])


def test_mismatched_weights_rejected():
    with pytest.raises(ValueError):
        QFunction(CFG, 2, [[0.0, 0.0, 0.0]], [1.0, 2.0])


def test_distance_examples():
    rng = np.random.default_rng(1)
    Q = random_q(rng, 5)
    assert hilbert_dist(Q, Q) == 0.0
    E = QFunction.empty(Q.kernel, Q.state_dim)
    assert hilbert_dist(Q, E) == pytest.approx(np.sqrt(hilbert_norm_sq(Q)), abs=1e-12)


def test_distance_kernel_mismatch():
    Q1 = QFunction(CFG, 2, [[0.0, 0.0, 0.0]], [1.0])
    Q2 = QFunction(KernelConfig((1.0, 1.0, 1.0)), 2, [[0.0, 0.0, 0.0]], [1.0])
    with pytest.raises(ValueError):
        hilbert_dist(Q1, Q2)


def test_shared_dictionary_distance_is_weight_difference_norm():
    rng = np.random.default_rng(2)
    Q1 = random_q(rng, 6)
    Q2 = QFunction(Q1.kernel, 2, Q1.points, rng.normal(size=6))
    dw = Q1.weights - Q2.weights
    K = Q1.gram
    assert hilbert_dist(Q1, Q2) == pytest.approx(np.sqrt(dw @ K @ dw), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 8), st.integers(0, 8))
def test_three_term_distance_matches_union_form(seed, m1, m2):
    rng = np.random.default_rng(seed)
    Q1 = random_q(rng, m1)
    Q2 = QFunction(Q1.kernel, 2, rng.uniform(-1, 1, (m2, 3)), rng.normal(size=m2))
    assert hilbert_dist(Q1, Q2) ** 2 == pytest.approx(union_dist(Q1, Q2) ** 2, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_is_pseudometric(seed):
    rng = np.random.default_rng(seed)
    A = random_q(rng, rng.integers(0, 6))
    B, C = (QFunction(A.kernel, 2, rng.uniform(-1, 1, (k, 3)), rng.normal(size=k))
            for k in rng.integers(0, 6, 2))
    assert hilbert_dist(A, B) == pytest.approx(hilbert_dist(B, A), abs=1e-12)
    assert hilbert_dist(A, C) <= hilbert_dist(A, B) + hilbert_dist(B, C) + 1e-9


def test_zero_norm_iff_zero_everywhere():
    rng = np.random.default_rng(3)
    probes = rng.uniform(-2, 2, (100, 3))
    Z = QFunction(CFG, 2, [[0.2, 0.0, 0.1], [0.2, 0.0, 0.1], [0.5, 0.01, 0.9]], [1.5, -1.5, 0.0])
    assert hilbert_norm_sq(Z) <= 1e-18
    assert np.all(np.abs(Z.evaluate(probes)) <= 1e-9)
    Q = random_q(rng, 3)
    assert hilbert_norm_sq(Q) > 0
    assert np.any(np.abs(Q.evaluate(rng.uniform(-1, 1, (100, 3)))) > 1e-9)


def test_append_from_empty_keeps_exact_weights():
    alpha, gamma, z = 0.25, 0.99, 1.7
    x, x_next = [0.1, 0.02, 0.5], [0.12, 0.03, -0.4]
    Q = append_atoms(QFunction.empty(CFG, 2), 1.0, [(x, alpha * z), (x_next, -alpha * gamma * z)])
    assert Q.model_order == 2
    assert Q.weights.tolist() == [alpha * z, -alpha * gamma * z]
    assert Q.points.tolist() == [x, x_next]


def test_append_scales_existing():
    rng = np.random.default_rng(4)
    Q = random_q(rng, 4)
    factor = 1.0 - 0.25 * 1e-4
    assert factor == 0.999975
    Q2 = append_atoms(Q, factor, [(rng.uniform(size=3), 0.3)])
    assert np.array_equal(Q2.weights[:4], factor * Q.weights)
    assert Q2.model_order == 5


def test_append_zero_weight_is_invisible():
    rng = np.random.default_rng(5)
    Q = random_q(rng, 3)
    Q2 = append_atoms(Q, 1.0, [(rng.uniform(size=3), 0.0)])
    X = rng.uniform(-1, 1, (10, 3))
    assert np.allclose(Q2.evaluate(X), Q.evaluate(X), atol=1e-15, rtol=0)


@pytest.mark.parametrize("batch", [1, 2, 3])
def test_incremental_inverse_matches_direct(batch):
    rng = np.random.default_rng(6)
    # starting from the empty function keeps the caches populated, so every
    # append goes through the block update rather than a fresh factorisation
    Q = QFunction.empty(KernelConfig((0.25, 0.25, 0.25)), 2)
    for _ in range(12):
        Q = append_atoms(Q, 0.99, [(rng.uniform(-1, 1, 3), 0.1) for _ in range(batch)])
        assert Q.has_cached_inverse
        A = Q.gram + Q.kernel.jitter * np.eye(Q.model_order)
        direct = np.linalg.inv(A)
        assert np.allclose(Q.gram_inv, direct, atol=1e-10 * np.abs(direct).max(), rtol=0)


def test_incremental_inverse_backward_error_when_ill_conditioned():
    rng = np.random.default_rng(7)
    Q = QFunction.empty(KernelConfig((0.8, 0.8, 0.8)), 2)
    for _ in range(40):
        Q = append_atoms(Q, 1.0, [(rng.uniform(-1, 1, 3), 0.1)])
    A = Q.gram + Q.kernel.jitter * np.eye(Q.model_order)
    cond = np.linalg.cond(A)
    x = rng.normal(size=Q.model_order)
    y = Q.gram_inv @ (A @ x)
    assert np.linalg.norm(y - x) <= 1e-13 * cond * np.linalg.norm(x)


def test_qfunction_is_immutable():
    Q = QFunction(CFG, 2, [[0.0, 0.0, 0.0]], [1.0])
    with pytest.raises(ValueError):
        Q.weights[0] = 3.0


def test_gradient_at_peak_is_zero():
    Q = QFunction(CFG, 2, [[0.1, 0.01, 0.3]], [2.0])
    assert np.array_equal(action_gradient(Q, [0.1, 0.01], [0.3]), [0.0])


def test_gradient_closed_form():
    cfg = KernelConfig((1.0, 1.0, 1.0))
    Q = QFunction(cfg, 2, [[0.0, 0.0, 0.0]], [1.0])
    g = action_gradient(Q, [0.0, 0.0], [0.5])
    assert g[0] == pytest.approx(-0.5 * np.exp(-0.125), abs=1e-15)


def test_gradient_empty_is_zero():
    assert np.array_equal(action_gradient(QFunction.empty(CFG, 2), [0, 0], [0.1]), [0.0])


def _fd_gradient(Q, s, a, h=1e-5):
    g = np.empty(a.size)
    for j in range(a.size):
        e = np.zeros(a.size)
        e[j] = h
        g[j] = (Q(s, a + e) - Q(s, a - e)) / (2 * h)
    return g


def test_gradient_matches_finite_differences_100_draws():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        p, q = rng.integers(1, 4), rng.integers(1, 3)
        Q = random_q(rng, 5, p=p, q=q, bandwidths=rng.uniform(0.5, 2.0, p + q))
        s, a = rng.uniform(-1, 1, p), rng.uniform(-1, 1, q)
        g, fd = action_gradient(Q, s, a), _fd_gradient(Q, s, a)
        scale = max(np.linalg.norm(fd), 1e-3)
        worst = max(worst, np.linalg.norm(g - fd) / scale)
    assert worst <= 1e-5


def test_serialisation_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(8)
    Q = random_q(rng, 7)
    path = tmp_path / "q.txt"
    save_qfunction(Q, path)
    R = load_qfunction(path)
    assert np.array_equal(R.points, Q.points)
    assert np.array_equal(R.weights, Q.weights)
    assert R.kernel == Q.kernel and R.state_dim == Q.state_dim
    assert dumps(R) == dumps(Q)


def test_serialisation_of_empty_q():
    Q = QFunction.empty(CFG, 2)
    R = loads(dumps(Q))
    assert R.model_order == 0 and R.kernel == CFG


def test_loads_rejects_garbage():
    with pytest.raises(ValueError):
        loads("not a q function\n1,2,3\n")
