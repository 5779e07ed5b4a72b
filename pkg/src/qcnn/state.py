"""Dense state-vector kernels.

Bit layout is little-endian throughout the package: qubit 0 is the least
significant bit of the basis-state index. Image registers put the row bits
low and the column bits high.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qcnn.errors import DimensionError, ZeroProbabilityError

UNITARY_ATOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

_FIXED = {"X": PAULI["X"], "Y": PAULI["Y"], "Z": PAULI["Z"], "H": HADAMARD,
          "CNOT": PAULI["X"], "MCX": PAULI["X"]}
GATE_KINDS = ("X", "Y", "Z", "H", "CNOT", "MCX", "U", "CU")


@dataclass
class QuantumState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise DimensionError(
                f"expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {self.amplitudes.shape}")

    @classmethod
    def zero(cls, num_qubits: int) -> "QuantumState":
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "QuantumState":
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "QuantumState":
        return QuantumState(self.num_qubits, self.amplitudes.copy())

    def tensor(self, high: "QuantumState") -> "QuantumState":
        """Append ``high`` as the more significant qubits."""
        return QuantumState(self.num_qubits + high.num_qubits,
                            np.kron(high.amplitudes, self.amplitudes))


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``matrix`` is only read for kinds ``U`` and ``CU``; its index bit j
    corresponds to ``targets[j]``. ``control_values`` defaults to all ones.
    """

    kind: str
    targets: tuple
    controls: tuple = ()
    control_values: tuple | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.control_values is None:
            object.__setattr__(self, "control_values", (1,) * len(self.controls))
        if len(self.control_values) != len(self.controls):
            raise ValueError("one control value per control qubit")
        if set(self.targets) & set(self.controls):
            raise ValueError("control and target qubits must be disjoint")
        if len(set(self.targets)) != len(self.targets) or len(set(self.controls)) != len(self.controls):
            raise ValueError("repeated qubit index")
        if self.kind == "CNOT" and len(self.controls) != 1:
            raise ValueError("CNOT takes exactly one control")
        if self.kind in ("U", "CU"):
            if self.matrix is None:
                raise ValueError(f"{self.kind} gate needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            dim = 1 << len(self.targets)
            if m.shape != (dim, dim):
                raise DimensionError(f"matrix shape {m.shape} does not act on {len(self.targets)} qubit(s)")
            if self.kind == "U" and (len(self.targets) != 1 or self.controls):
                raise ValueError("U is an uncontrolled single-qubit unitary; use CU")
            check_unitary(m)
            object.__setattr__(self, "matrix", m)
        elif len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on one target")

    def unitary(self) -> np.ndarray:
        if self.kind in ("U", "CU"):
            return self.matrix
        return _FIXED[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in ("U", "CU"):
            return Gate(self.kind, self.targets, self.controls, self.control_values,
                        self.matrix.conj().T, self.label + "_dg" if self.label else "")
        return self

    def qubits(self) -> tuple:
        return self.controls + self.targets


def check_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> None:
    m = np.asarray(matrix)
    if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0):
        raise ValueError("matrix is not unitary")


def _validate(num_qubits: int, qubits) -> None:
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise IndexError(f"qubit index {q} out of range for {num_qubits} qubits")


def apply_matrix(amps: np.ndarray, num_qubits: int, matrix: np.ndarray, targets,
                 controls=(), control_values=()) -> np.ndarray:
    """Apply a dense unitary on ``targets`` conditioned on control bits.

    Works on a reshaped view of the amplitude vector, never building the
    full 2^n operator. Returns a new array.
    """
    n = num_qubits
    out = np.array(amps, dtype=complex, copy=True)
    t = out.reshape((2,) * n) if n else out.reshape(())
    index = [slice(None)] * n
    for q, v in zip(controls, control_values):
        index[n - 1 - q] = int(v)
    index = tuple(index)
    sub = t[index]
    free_axes = [a for a in range(n) if not isinstance(index[a], int)]
    k = len(targets)
    # matrix axes after reshape: output bits k-1..0 then input bits k-1..0
    in_axes = [free_axes.index(n - 1 - targets[k - 1 - j]) for j in range(k)]
    m = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    res = np.tensordot(m, sub, axes=(list(range(k, 2 * k)), in_axes))
    res = np.moveaxis(res, list(range(k)), in_axes)
    t[index] = res
    return out


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    _validate(state.num_qubits, gate.qubits())
    if gate.kind in ("X", "CNOT", "MCX"):
        amps = _apply_x(state.amplitudes, state.num_qubits, gate.targets[0],
                        gate.controls, gate.control_values)
    else:
        amps = apply_matrix(state.amplitudes, state.num_qubits, gate.unitary(),
                            gate.targets, gate.controls, gate.control_values)
    return QuantumState(state.num_qubits, amps)


def _apply_x(amps, n, target, controls, control_values):
    # X family is a pure index permutation: swap the target-bit halves
    idx = np.arange(1 << n)
    mask = np.ones(idx.shape, dtype=bool)
    for q, v in zip(controls, control_values):
        mask &= ((idx >> q) & 1) == v
    src = np.where(mask, idx ^ (1 << target), idx)
    return np.asarray(amps)[src]


def apply_circuit(state: QuantumState, gates) -> QuantumState:
    for g in gates:
        state = apply_gate(state, g)
    return state


def apply_controlled_block(state: QuantumState, unitary: np.ndarray, work_qubits,
                           ancilla_qubits, ancilla_value: int) -> QuantumState:
    """Apply ``unitary`` to the work register where the ancilla bits equal ``ancilla_value``.

    Bit j of ``ancilla_value`` is read from ``ancilla_qubits[j]``.
    """
    unitary = np.asarray(unitary, dtype=complex)
    work_qubits = tuple(work_qubits)
    ancilla_qubits = tuple(ancilla_qubits)
    if unitary.shape != (1 << len(work_qubits),) * 2:
        raise DimensionError(
            f"unitary of shape {unitary.shape} does not match {len(work_qubits)} work qubits")
    _validate(state.num_qubits, work_qubits + ancilla_qubits)
    if set(work_qubits) & set(ancilla_qubits):
        raise ValueError("work and ancilla registers overlap")
    if not 0 <= ancilla_value < (1 << len(ancilla_qubits)):
        raise ValueError(f"ancilla value {ancilla_value} does not fit {len(ancilla_qubits)} qubits")
    values = tuple((ancilla_value >> j) & 1 for j in range(len(ancilla_qubits)))
    amps = apply_matrix(state.amplitudes, state.num_qubits, unitary, work_qubits,
                        ancilla_qubits, values)
    return QuantumState(state.num_qubits, amps)


def _match_mask(num_qubits: int, qubits, value: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    mask = np.ones(idx.shape, dtype=bool)
    for j, q in enumerate(qubits):
        mask &= ((idx >> q) & 1) == ((value >> j) & 1)
    return mask


def outcome_probability(state: QuantumState, qubits, value: int) -> float:
    qubits = tuple(qubits)
    _validate(state.num_qubits, qubits)
    mask = _match_mask(state.num_qubits, qubits, value)
    return float(np.sum(np.abs(state.amplitudes[mask]) ** 2))


def postselect(state: QuantumState, qubits, value: int, discard: bool = False):
    """Condition on measuring ``value`` on ``qubits`` (bit j of value on ``qubits[j]``).

    Returns ``(state, probability)``. The returned state is renormalised; with
    ``discard=True`` the measured qubits are removed from the register, which
    keeps the remaining qubits in their original relative order.
    """
    qubits = tuple(qubits)
    _validate(state.num_qubits, qubits)
    mask = _match_mask(state.num_qubits, qubits, value)
    prob = float(np.sum(np.abs(state.amplitudes[mask]) ** 2))
    if prob <= 0.0:
        raise ZeroProbabilityError(
            f"outcome {value} on qubits {qubits} has zero probability")
    scale = 1.0 / np.sqrt(prob)
    if discard:
        amps = state.amplitudes[mask] * scale
        return QuantumState(state.num_qubits - len(qubits), amps), prob
    amps = np.where(mask, state.amplitudes, 0.0) * scale
    return QuantumState(state.num_qubits, amps), prob


def marginal_probabilities(probs: np.ndarray, num_qubits: int, keep_qubits) -> np.ndarray:
    keep_qubits = tuple(keep_qubits)
    n = num_qubits
    t = np.asarray(probs, dtype=float).reshape((2,) * n) if n else np.asarray(probs).reshape(())
    drop_axes = tuple(n - 1 - q for q in range(n) if q not in keep_qubits)
    reduced = t.sum(axis=drop_axes)
    # remaining axes are the kept qubits in descending qubit order
    kept_desc = sorted(keep_qubits, reverse=True)
    order = [kept_desc.index(q) for q in reversed(keep_qubits)]
    return np.transpose(reduced, order).reshape(-1)


def marginal_l2(state: QuantumState, keep_qubits) -> np.ndarray:
    """Square root of the marginal distribution on ``keep_qubits``.

    Entry y (bit j of y on ``keep_qubits[j]``) is
    sqrt(sum |a_x|^2 over x whose kept bits equal y).
    """
    keep_qubits = tuple(keep_qubits)
    _validate(state.num_qubits, keep_qubits)
    if len(set(keep_qubits)) != len(keep_qubits):
        raise ValueError("repeated qubit in keep_qubits")
    return np.sqrt(marginal_probabilities(state.probabilities(), state.num_qubits, keep_qubits))
