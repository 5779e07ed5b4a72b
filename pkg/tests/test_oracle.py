"""The brute-force filters are checked against a dense Kronecker-product oracle
and against hand-computed values, since everything else trusts them."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import u_prime_kron
from qcnn.lcu import PRESETS
from qcnn.oracle import cyclic_filter, interior, interior_filter, interior_matches, shift_oracle


def test_identity_mask(rng):
    F = rng.random((5, 5))
    assert np.array_equal(cyclic_filter(F, PRESETS["identity"]), F)


def test_w12_shifts_rows():
    # w[0, 1] (u=1, v=2 in 1-based terms): G[i, j] = F[i - 1, j]
    F = np.arange(16, dtype=float).reshape(4, 4)
    w = np.zeros((3, 3))
    w[0, 1] = 1
    G = cyclic_filter(F, w)
    for i in range(4):
        for j in range(4):
            assert G[i, j] == F[(i - 1) % 4, j]
    assert np.array_equal(G, shift_oracle(F, -1, 0))


def test_hand_computed_4x4_edge():
    F = np.zeros((4, 4))
    F[1, 1] = 1.0
    G = cyclic_filter(F, PRESETS["edge-detect"])
    expected = np.zeros((4, 4))
    expected[0:3, 0:3] = -1
    expected[1, 1] = 8
    assert np.array_equal(G, expected)


@pytest.mark.parametrize("M", [4, 8])
def test_matches_dense_kron_oracle(rng, M):
    for _ in range(5):
        F, w = rng.random((M, M)), rng.normal(size=(3, 3))
        dense = (u_prime_kron(w, M) @ F.flatten(order="F")).reshape((M, M), order="F")
        assert np.allclose(cyclic_filter(F, w), dense, atol=1e-12)


@pytest.mark.parametrize("name", ["edge-detect", "smooth", "sharpen"])
@pytest.mark.parametrize("M", [4, 8, 16])
def test_interior_equals_cyclic_interior(rng, name, M):
    F = rng.random((M, M))
    w = PRESETS[name]
    assert np.allclose(interior(cyclic_filter(F, w)), interior(interior_filter(F, w)), atol=1e-12)
    assert interior_matches(cyclic_filter(F, w), F, w)


def test_interior_filter_copies_border(rng):
    F = rng.random((6, 6))
    G = interior_filter(F, PRESETS["sharpen"])
    assert np.array_equal(G[0], F[0]) and np.array_equal(G[:, -1], F[:, -1])


def test_constant_image_edge_interior_zero():
    G = interior_filter(np.full((8, 8), 3.0), PRESETS["edge-detect"])
    assert np.allclose(interior(G), 0, atol=1e-12)


def test_constant_image_smooth_interior_constant():
    G = interior_filter(np.full((8, 8), 3.0), PRESETS["smooth"])
    assert np.allclose(interior(G), 3.0, atol=1e-12)


@given(seed=st.integers(0, 2 ** 31), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_linear_in_image_and_mask(seed, a, b):
    rng = np.random.default_rng(seed)
    F1, F2 = rng.random((4, 4)), rng.random((4, 4))
    w1, w2 = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    assert np.allclose(cyclic_filter(a * F1 + b * F2, w1),
                       a * cyclic_filter(F1, w1) + b * cyclic_filter(F2, w1), atol=1e-10)
    assert np.allclose(cyclic_filter(F1, a * w1 + b * w2),
                       a * cyclic_filter(F1, w1) + b * cyclic_filter(F1, w2), atol=1e-10)


@given(seed=st.integers(0, 2 ** 31))
def test_transpose_symmetry(seed):
    rng = np.random.default_rng(seed)
    F, w = rng.random((4, 4)), rng.normal(size=(3, 3))
    assert np.allclose(cyclic_filter(F.T, w.T), cyclic_filter(F, w).T, atol=1e-12)
