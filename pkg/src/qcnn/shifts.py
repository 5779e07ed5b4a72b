"""Cyclic shift operators compiled to elementary gates.

The increment on q qubits is the usual carry cascade of multi-controlled X
gates. Multi-controlled X gates are expanded without extra qubits using the
Barenco et al. constructions: the outermost layer splits off a controlled
square root, and the inner multi-controlled X gates borrow the idle target
as a dirty ancilla, which keeps each expansion quadratic in the number of
controls.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import sqrtm

from qcnn.state import Gate

INCREMENT = "inc"
DECREMENT = "dec"

_T = np.diag([1.0, np.exp(1j * np.pi / 4)])
_TDG = _T.conj()
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _u(q, matrix, label=""):
    return Gate("U", (q,), matrix=matrix, label=label)


def _cnot(c, t):
    return Gate("CNOT", (t,), (c,))


@dataclass
class ShiftCircuit:
    qubits: int
    direction: str
    gates: list
    expanded: list = field(repr=False, default_factory=list)

    @property
    def basic_gate_count(self) -> int:
        return len(self.expanded)

    def counts_by_kind(self) -> dict:
        return dict(Counter(g.kind for g in self.expanded))


def increment_gates(q: int) -> list:
    gates = []
    for top in range(q - 1, 0, -1):
        controls = tuple(range(top))
        gates.append(_cnot(0, 1) if top == 1 else Gate("MCX", (top,), controls))
    gates.append(Gate("X", (0,)))
    return gates


def compile_shift(q: int, direction: str = INCREMENT) -> ShiftCircuit:
    if q < 1:
        raise ValueError("a shift register needs at least one qubit")
    if direction not in (INCREMENT, DECREMENT):
        raise ValueError(f"direction must be {INCREMENT!r} or {DECREMENT!r}")
    gates = increment_gates(q)
    if direction == DECREMENT:
        gates = [g.inverse() for g in reversed(gates)]
    expanded = []
    for g in gates:
        expanded.extend(expand_mcx(g) if g.kind == "MCX" else [g])
    return ShiftCircuit(q, direction, gates, expanded)


def count_basic_gates(q: int) -> int:
    return compile_shift(q).basic_gate_count


def shift_matrix(dim: int, step: int = 1) -> np.ndarray:
    """Permutation matrix sending |k> to |k + step mod dim>."""
    m = np.zeros((dim, dim))
    for k in range(dim):
        m[(k + step) % dim, k] = 1.0
    return m


# -- multi-controlled X expansion -------------------------------------------

def toffoli(c1: int, c2: int, t: int) -> list:
    """Standard 15-gate Clifford+T Toffoli."""
    return [
        _u(t, _H, "H"), _cnot(c2, t), _u(t, _TDG, "Tdg"), _cnot(c1, t), _u(t, _T, "T"),
        _cnot(c2, t), _u(t, _TDG, "Tdg"), _cnot(c1, t), _u(c2, _T, "T"), _u(t, _T, "T"),
        _u(t, _H, "H"), _cnot(c1, c2), _u(c1, _T, "T"), _u(c2, _TDG, "Tdg"), _cnot(c1, c2),
    ]


def _zyz(u: np.ndarray):
    """u = exp(i*alpha) Rz(beta) Ry(gamma) Rz(delta)."""
    det = np.linalg.det(u)
    alpha = np.angle(det) / 2
    v = u * np.exp(-1j * alpha)
    gamma = 2 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    s = np.angle(v[1, 1]) if abs(v[1, 1]) > 1e-12 else 0.0
    d = np.angle(v[1, 0]) if abs(v[1, 0]) > 1e-12 else 0.0
    if abs(v[0, 0]) < 1e-12:
        beta, delta = 2 * d, 0.0
    elif abs(v[1, 0]) < 1e-12:
        beta, delta = s, s
    else:
        beta, delta = s + d, s - d
    return alpha, beta, gamma, delta


def _rz(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def _ry(a):
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def controlled_unitary(control: int, target: int, u: np.ndarray) -> list:
    """Singly-controlled 2x2 unitary as C, CNOT, B, CNOT, A plus a control phase."""
    alpha, beta, gamma, delta = _zyz(u)
    a = _rz(beta) @ _ry(gamma / 2)
    b = _ry(-gamma / 2) @ _rz(-(delta + beta) / 2)
    c = _rz((delta - beta) / 2)
    gates = [_u(target, c), _cnot(control, target), _u(target, b),
             _cnot(control, target), _u(target, a)]
    if abs(alpha) > 1e-15:
        gates.append(_u(control, np.diag([1.0, np.exp(1j * alpha)]), "P"))
    return gates


def _mcx_dirty_chain(controls, target, dirty) -> list:
    """C^m(X) with m-2 borrowed (dirty) qubits: 4(m-2) Toffolis."""
    m = len(controls)
    c, a = list(controls), list(dirty[: m - 2])

    def ladder():
        down = [toffoli(c[i], a[i - 2], a[i - 1]) for i in range(m - 2, 1, -1)]
        up = [toffoli(c[i], a[i - 2], a[i - 1]) for i in range(2, m - 1)]
        return [g for blk in down for g in blk] + toffoli(c[0], c[1], a[0]) + [g for blk in up for g in blk]

    top = toffoli(c[m - 1], a[m - 3], target)
    return top + ladder() + top + ladder()


def mcx_with_dirty(controls, target, dirty) -> list:
    controls, dirty = list(controls), list(dirty)
    m = len(controls)
    if m == 0:
        return [Gate("X", (target,))]
    if m == 1:
        return [_cnot(controls[0], target)]
    if m == 2:
        return toffoli(controls[0], controls[1], target)
    if len(dirty) >= m - 2:
        return _mcx_dirty_chain(controls, target, dirty)
    if dirty:
        # split the controls so each half borrows the other half
        helper = dirty[0]
        m1 = (m + 1) // 2
        first, second = controls[:m1], controls[m1:]
        g1 = mcx_with_dirty(first, helper, second + [target])
        g2 = mcx_with_dirty(second + [helper], target, first)
        return g1 + g2 + g1 + g2
    return multi_controlled_unitary(controls, target, np.array([[0, 1], [1, 0]], dtype=complex))


def multi_controlled_unitary(controls, target, u) -> list:
    """C^m(U) with no spare qubits (quadratic gate count)."""
    controls = list(controls)
    if not controls:
        return [_u(target, u)]
    if len(controls) == 1:
        return controlled_unitary(controls[0], target, u)
    v = sqrtm(u)
    last, rest = controls[-1], controls[:-1]
    inner = mcx_with_dirty(rest, last, [target])
    return (controlled_unitary(last, target, v) + inner
            + controlled_unitary(last, target, v.conj().T) + inner
            + multi_controlled_unitary(rest, target, v))


def expand_mcx(gate: Gate) -> list:
    """Expand an all-ones-controlled X gate into X, CNOT and single-qubit unitaries."""
    if gate.kind not in ("X", "CNOT", "MCX"):
        raise ValueError(f"expand_mcx expects an X-family gate, got {gate.kind}")
    if any(v != 1 for v in gate.control_values):
        raise ValueError("expand_mcx expects positive controls")
    return mcx_with_dirty(gate.controls, gate.targets[0], [])


def circuit_unitary(gates, num_qubits: int) -> np.ndarray:
    """Dense unitary of a gate list, column by column (test oracle, small n only)."""
    from qcnn.state import QuantumState, apply_circuit

    dim = 1 << num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        out[:, k] = apply_circuit(QuantumState.basis(num_qubits, k), gates).amplitudes
    return out


def to_textlist(gates) -> str:
    """One gate per line: ``KIND target controls...``.

    Single-qubit ``U`` gates append ``: m00 m01 m10 m11`` (complex entries)
    and a ``# label`` comment so the list replays exactly.
    """
    lines = []
    for g in gates:
        parts = [g.kind, *map(str, g.targets), *map(str, g.controls)]
        if g.kind == "U":
            parts += [":", *(repr(complex(v)) for v in np.asarray(g.matrix).reshape(-1))]
            if g.label:
                parts += ["#", g.label]
        lines.append(" ".join(parts))
    return "\n".join(lines)


def parse_textlist(text: str) -> list:
    """Inverse of :func:`to_textlist` for the output of ``decompose-shift``."""
    gates = []
    for line in text.strip().splitlines():
        line, _, label = line.partition("#")
        head, _, entries = line.partition(":")
        kind, target, *controls = head.split()
        matrix = None
        if kind == "U":
            matrix = np.array([complex(v) for v in entries.split()]).reshape(2, 2)
        gates.append(Gate(kind, (int(target),), tuple(int(c) for c in controls),
                          matrix=matrix, label=label.strip()))
    return gates
