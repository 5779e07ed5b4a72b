import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import embed_single, random_state, z_hamiltonian_dense, Z
from qcnn.errors import DimensionError
from qcnn.hamiltonian import (ZHamiltonian, activate, expectation, feature_matrix, features,
                              gradient, num_parameters, predict, sigmoid, softmax)
from qcnn.state import QuantumState


@pytest.mark.parametrize("q,count", [(1, 2), (3, 7), (8, 37)])
def test_parameter_count(q, count):
    assert num_parameters(q) == count
    assert ZHamiltonian.random(q, np.random.default_rng(0)).num_parameters == count


def test_zero_state_sums_all_coefficients(rng):
    H = ZHamiltonian.random(4, rng)
    assert expectation(QuantumState.zero(4), H) == pytest.approx(H.to_vector().sum(), abs=1e-14)


def test_identity_only(rng):
    H = ZHamiltonian.from_vector(3, np.r_[1.0, np.zeros(6)])
    assert expectation(QuantumState(3, random_state(rng, 3)), H) == pytest.approx(1.0, abs=1e-14)


def test_uniform_state_without_h0(rng):
    theta = rng.normal(size=num_parameters(5))
    theta[0] = 0
    H = ZHamiltonian.from_vector(5, theta)
    assert expectation(QuantumState(5, np.full(32, 32 ** -0.5)), H) == pytest.approx(0.0, abs=1e-14)


def test_gradient_zero_state():
    g0, g1, g2 = gradient(QuantumState.zero(3), ZHamiltonian.random(3, np.random.default_rng(1)))
    assert g0 == 1 and np.all(g1 == 1) and np.all(g2 == 1)


def test_gradient_uniform_state():
    g0, g1, g2 = gradient(QuantumState(3, np.full(8, 8 ** -0.5)), ZHamiltonian.random(3, np.random.default_rng(1)))
    assert g0 == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(g1, 0, atol=1e-15) and np.allclose(g2, 0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_matches_dense_pauli_oracle(seed):
    rng = np.random.default_rng(seed)
    H = ZHamiltonian.random(3, rng, scale=1.0)
    psi = random_state(rng, 3)
    dense = z_hamiltonian_dense(H.h0, H.h1, H.h2, 3)
    ref = np.real(np.conj(psi) @ dense @ psi)
    assert expectation(QuantumState(3, psi), H) == pytest.approx(ref, abs=1e-12)


def test_pair_order_is_lexicographic():
    # h2 index 0 is (0, 1), index 1 is (0, 2), index 2 is (1, 2)
    theta = np.zeros(7)
    theta[1 + 3 + 1] = 1.0
    H = ZHamiltonian.from_vector(3, theta)
    ref = np.real(np.diag(embed_single(Z, 0, 3) @ embed_single(Z, 2, 3)))
    assert np.allclose(H.diagonal(), ref)


def test_feature_matrix_shape_and_signs():
    Phi = feature_matrix(8)
    assert Phi.shape == (256, 37)
    assert set(np.unique(Phi)) == {-1.0, 1.0}
    assert np.all(Phi[0] == 1)


def test_gradient_random_three_qubits_vs_fd(rng):
    psi = QuantumState(3, random_state(rng, 3))
    H = ZHamiltonian.random(3, rng)
    g = np.concatenate([[gradient(psi, H)[0]], gradient(psi, H)[1], gradient(psi, H)[2]])
    theta = H.to_vector()
    fd = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = 1e-5
        fd[i] = (expectation(psi, ZHamiltonian.from_vector(3, theta + e))
                 - expectation(psi, ZHamiltonian.from_vector(3, theta - e))) / 2e-5
    assert np.allclose(g, fd, atol=1e-8)


@given(seed=st.integers(0, 2 ** 31), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_linear_in_coefficients(seed, a, b):
    rng = np.random.default_rng(seed)
    psi = QuantumState(4, random_state(rng, 4))
    t1, t2 = rng.normal(size=11), rng.normal(size=11)
    lhs = expectation(psi, ZHamiltonian.from_vector(4, a * t1 + b * t2))
    rhs = a * expectation(psi, ZHamiltonian.from_vector(4, t1)) + b * expectation(psi, ZHamiltonian.from_vector(4, t2))
    assert lhs == pytest.approx(rhs, abs=1e-12)


@given(seed=st.integers(0, 2 ** 31))
def test_expectation_bounded(seed):
    rng = np.random.default_rng(seed)
    H = ZHamiltonian.random(8, rng, scale=2.0)
    psi = QuantumState(8, random_state(rng, 8))
    assert abs(expectation(psi, H)) <= H.coefficient_bound() + 1e-12


def test_features_match_gradient(rng):
    psi = QuantumState(8, random_state(rng, 8))
    H = ZHamiltonian.random(8, rng)
    g0, g1, g2 = gradient(psi, H)
    assert np.allclose(features(psi.probabilities(), 8), np.r_[g0, g1, g2], atol=1e-14)


def test_serialisation_order(rng):
    H = ZHamiltonian.random(8, rng)
    flat = json.loads(json.dumps(H.to_vector().tolist()))
    assert flat[0] == H.h0 and flat[1:9] == H.h1.tolist() and flat[9:] == H.h2.tolist()
    assert np.array_equal(ZHamiltonian.from_vector(8, flat).to_vector(), H.to_vector())


def test_dimension_mismatch(rng):
    H = ZHamiltonian.random(3, rng)
    with pytest.raises(DimensionError):
        expectation(QuantumState.zero(4), H)
    with pytest.raises(DimensionError):
        ZHamiltonian.from_vector(3, np.zeros(6))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        ZHamiltonian.from_vector(1, [np.inf, 0.0])


# -- activations -------------------------------------------------------------

def test_sigmoid_at_zero():
    assert sigmoid(0.0) == 0.5 and activate(0.0, "sigmoid") == 0.5


def test_sigmoid_extremes_are_finite():
    assert sigmoid(-1000.0) == pytest.approx(0.0) and sigmoid(1000.0) == pytest.approx(1.0)


def test_softmax_equal_raws_uniform():
    assert np.allclose(softmax(np.full(10, 3.3)), 0.1)


def test_argmax_prediction():
    assert predict(activate(np.r_[1.0, np.zeros(9)], "softmax"), "softmax") == 0


@pytest.mark.parametrize("p,label", [(0.49, 0), (0.51, 1)])
def test_threshold_prediction(p, label):
    assert predict(p, "sigmoid") == label


def test_unknown_activation():
    with pytest.raises(ValueError):
        activate(0.0, "relu")
