"""Fully connected layer: expectation of a diagonal Pauli-Z Hamiltonian.

H = h0 I + sum_i h1[i] Z_i + sum_{i<j} h2[ij] Z_i Z_j, with pair
coefficients stored in lexicographic (i, j) order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from qcnn.errors import DimensionError
from qcnn.state import QuantumState


def num_parameters(q: int) -> int:
    return 1 + q + q * (q - 1) // 2


@lru_cache(maxsize=None)
def z_signs(q: int) -> np.ndarray:
    """(2^q, q) matrix of z_i(x) = +1 if bit i of x is 0 else -1."""
    x = np.arange(1 << q)[:, None]
    return 1.0 - 2.0 * ((x >> np.arange(q)[None, :]) & 1)


@lru_cache(maxsize=None)
def feature_matrix(q: int) -> np.ndarray:
    """(2^q, 1 + q + q(q-1)/2) diagonal of every Hamiltonian term."""
    z = z_signs(q)
    pairs = [z[:, i] * z[:, j] for i, j in combinations(range(q), 2)]
    cols = [np.ones(1 << q), *z.T, *pairs]
    m = np.column_stack(cols)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class ZHamiltonian:
    num_qubits: int
    h0: float
    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        q = self.num_qubits
        h1 = np.asarray(self.h1, dtype=float).reshape(-1)
        h2 = np.asarray(self.h2, dtype=float).reshape(-1)
        if h1.size != q or h2.size != q * (q - 1) // 2:
            raise DimensionError(f"coefficient sizes {h1.size}, {h2.size} do not fit {q} qubits")
        if not (np.isfinite(self.h0) and np.all(np.isfinite(h1)) and np.all(np.isfinite(h2))):
            raise ValueError("Hamiltonian coefficients must be finite")
        object.__setattr__(self, "h0", float(self.h0))
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)

    @property
    def num_parameters(self) -> int:
        return num_parameters(self.num_qubits)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.h0], self.h1, self.h2])

    @classmethod
    def from_vector(cls, q: int, theta) -> "ZHamiltonian":
        theta = np.asarray(theta, dtype=float)
        if theta.size != num_parameters(q):
            raise DimensionError(f"expected {num_parameters(q)} coefficients, got {theta.size}")
        return cls(q, theta[0], theta[1:1 + q], theta[1 + q:])

    @classmethod
    def random(cls, q: int, rng, scale: float = 0.1) -> "ZHamiltonian":
        return cls.from_vector(q, rng.uniform(-scale, scale, num_parameters(q)))

    def diagonal(self) -> np.ndarray:
        return feature_matrix(self.num_qubits) @ self.to_vector()

    def coefficient_bound(self) -> float:
        return float(np.sum(np.abs(self.to_vector())))


def _probs(state: QuantumState, H: ZHamiltonian) -> np.ndarray:
    if state.num_qubits != H.num_qubits:
        raise DimensionError(f"state has {state.num_qubits} qubits, Hamiltonian {H.num_qubits}")
    return state.probabilities()


def features(probs: np.ndarray, q: int) -> np.ndarray:
    """<p|T|p> for every term T, in coefficient order. Also the gradient."""
    return np.asarray(probs, dtype=float) @ feature_matrix(q)


def expectation(state: QuantumState, H: ZHamiltonian) -> float:
    return float(features(_probs(state, H), H.num_qubits) @ H.to_vector())


def gradient(state: QuantumState, H: ZHamiltonian):
    """(d/dh0, d/dh1, d/dh2) of the expectation; independent of H's values."""
    g = features(_probs(state, H), H.num_qubits)
    q = H.num_qubits
    return float(g[0]), g[1:1 + q], g[1 + q:]


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def softmax(x):
    x = np.asarray(x, dtype=float)
    e = np.exp(x - np.max(x))
    return e / e.sum()


def activate(raw, mode: str = "sigmoid"):
    if mode == "sigmoid":
        return float(sigmoid(raw))
    if mode == "softmax":
        return softmax(raw)
    raise ValueError(f"unknown activation {mode!r}")


def predict(activated, mode: str = "sigmoid") -> int:
    """Binary: 0 below 0.5 (digit '1'), 1 otherwise. Ten-class: argmax."""
    if mode == "sigmoid":
        return int(activated >= 0.5)
    return int(np.argmax(activated))
