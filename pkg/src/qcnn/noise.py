"""Stochastic Pauli trajectory noise.

Each injection point draws from its own generator seeded by
``(channel.seed, op_index)``, so a trajectory is reproducible no matter in
which order injection points are visited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qcnn.state import PAULI, Gate, QuantumState, apply_gate, apply_matrix

GRANULARITIES = ("logical", "basic-gate")


@dataclass(frozen=True)
class NoiseChannel:
    probability: float = 0.01
    seed: int = 0
    palette: tuple = ("I", "X", "Y", "Z")
    granularity: str = "logical"

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"noise probability {self.probability} outside [0, 1]")
        if not self.palette or any(p not in PAULI for p in self.palette):
            raise ValueError(f"palette must be drawn from I, X, Y, Z; got {self.palette}")
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")

    def derive(self, *labels: int) -> "NoiseChannel":
        """Independent channel for one trajectory, keyed by integer labels."""
        seq = np.random.SeedSequence([self.seed, *[int(x) for x in labels]])
        seed = int(seq.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))
        return NoiseChannel(self.probability, seed, self.palette, self.granularity)

    def draw(self, op_index: int, num_qubits: int):
        """Return ``(qubit, pauli)`` if the channel fires at this op, else None."""
        if self.probability == 0.0:
            return None
        rng = np.random.default_rng([self.seed, int(op_index)])
        if rng.random() >= self.probability:
            return None
        qubit = int(rng.integers(num_qubits))
        pauli = self.palette[int(rng.integers(len(self.palette)))]
        return qubit, pauli

    def quiet(self, op_indices, num_qubits: int) -> bool:
        """True if none of the given injection points applies a non-identity Pauli."""
        for op in op_indices:
            event = self.draw(op, num_qubits)
            if event is not None and event[1] != "I":
                return False
        return True


def pauli_gate(qubit: int, pauli: str) -> Gate | None:
    if pauli == "I":
        return None
    return Gate(pauli, (qubit,))


def maybe_inject(state: QuantumState, channel: NoiseChannel | None, op_index: int) -> QuantumState:
    if channel is None:
        return state
    event = channel.draw(op_index, state.num_qubits)
    if event is None:
        return state
    gate = pauli_gate(*event)
    return state if gate is None else apply_gate(state, gate)


def inject_into(amps: np.ndarray, num_qubits: int, channel: NoiseChannel | None,
                op_index: int) -> np.ndarray:
    """Array-level variant of :func:`maybe_inject` used by the hot loops."""
    if channel is None:
        return amps
    event = channel.draw(op_index, num_qubits)
    if event is None or event[1] == "I":
        return amps
    qubit, pauli = event
    flat = apply_matrix(amps.reshape(-1), num_qubits, PAULI[pauli], (qubit,))
    return flat.reshape(amps.shape)
