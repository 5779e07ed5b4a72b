"""Pooling by discarding the row and column least-significant qubits.

Tracing out those two qubits leaves, for every 2x2 pixel block, the root of
the summed squared amplitudes of the block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qcnn.state import QuantumState, marginal_l2, marginal_probabilities


@dataclass(frozen=True)
class PoolSpec:
    image_qubits: int

    def __post_init__(self):
        if self.image_qubits < 2 or self.image_qubits % 2:
            raise ValueError(f"pooling needs an even qubit count >= 2, got {self.image_qubits}")

    @property
    def discarded(self) -> tuple:
        return (0, self.image_qubits // 2)

    @property
    def kept(self) -> tuple:
        return tuple(q for q in range(self.image_qubits) if q not in self.discarded)


def pool(state: QuantumState, layout: PoolSpec | None = None) -> QuantumState:
    layout = layout or PoolSpec(state.num_qubits)
    if state.num_qubits != layout.image_qubits:
        raise ValueError(f"state has {state.num_qubits} qubits, pool layout expects {layout.image_qubits}")
    residue = float(np.max(np.abs(state.amplitudes.imag)))
    if residue > 1e-9:
        raise ValueError(f"pooling expects real amplitudes, imaginary residue {residue:.2e}")
    out = marginal_l2(state, layout.kept)
    return QuantumState(layout.image_qubits - 2, out / np.linalg.norm(out))


def pooled_probabilities(probs: np.ndarray, image_qubits: int) -> np.ndarray:
    """Probability-level pooling used on the training hot path."""
    return marginal_probabilities(probs, image_qubits, PoolSpec(image_qubits).kept)
