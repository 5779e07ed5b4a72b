"""Quantum convolution layer: a 3x3 filter as a linear combination of nine shifts.

The adjusted (block-circulant) filter operator is

    U' = sum_{u,v} w[u, v] * E_v (column register) (x) E_u (row register)

with E_1 the cyclic increment, E_2 the identity and E_3 the decrement. Terms
are ordered column-major over the mask, so term k (0-based) is driven by
ancilla value k and carries weight ``w[k % 3, k // 3]``.

Two uncompute strategies are available:

``sdagger``
    Prepare-select-unprepare. The ancilla is prepared with amplitudes
    sqrt(|beta_k| / lambda), the select step applies sign(beta_k) Q_k, and the
    inverse preparation is applied before postselecting |0000>. The accepted
    branch is U'|f> / lambda, lambda = sum |beta_k|.
``hadamard``
    The ancilla is prepared with S (first column beta / N_c) and uncomputed
    with H^{(x)4}. All 16 outcomes are kept; outcome i carries the filter with
    sign-flipped weights (see :func:`branch_masks`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from qcnn.errors import ZeroProbabilityError
from qcnn.noise import NoiseChannel, inject_into
from qcnn.shifts import compile_shift, expand_mcx
from qcnn.state import Gate, QuantumState, apply_gate

NUM_ANCILLA = 4
ANCILLA_DIM = 1 << NUM_ANCILLA
SDAGGER = "sdagger"
HADAMARD = "hadamard"
UNCOMPUTE = (SDAGGER, HADAMARD)
# below this the accepted branch is rounding residue (amplitudes ~1e-12 of the input)
ZERO_PROBABILITY = 1e-24

PRESETS = {
    "edge-detect": np.array([[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]], dtype=float),
    "smooth": np.array([[1, 1, 1], [1, 5, 1], [1, 1, 1]], dtype=float) / 13,
    "sharpen": np.array([[-2, -2, -2], [-2, 32, -2], [-2, -2, -2]], dtype=float) / 16,
    "identity": np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=float),
}


class FilterMask:
    """A 3x3 real filter; ``w[u, v]`` weights the pixel at offset (u - 1, v - 1)."""

    def __init__(self, w):
        w = np.array(w, dtype=float)
        if w.shape != (3, 3):
            raise ValueError(f"filter mask must be 3x3, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("filter mask has non-finite entries")
        if not np.any(w):
            raise ValueError("filter mask is all zero")
        w.setflags(write=False)
        self.w = w

    def __repr__(self):
        return f"FilterMask({self.w.tolist()})"

    def __eq__(self, other):
        return isinstance(other, FilterMask) and np.array_equal(self.w, other.w)

    @classmethod
    def preset(cls, name: str) -> "FilterMask":
        try:
            return cls(PRESETS[name])
        except KeyError:
            raise ValueError(f"unknown mask preset {name!r}; choose from {sorted(PRESETS)}") from None

    @classmethod
    def from_file(cls, path) -> "FilterMask":
        rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError(f"{path}: mask file must hold 3 lines of 3 numbers")
        return cls([[float(x) for x in r] for r in rows])

    def to_file(self, path) -> None:
        Path(path).write_text("\n".join(" ".join(repr(float(x)) for x in row) for row in self.w) + "\n")


def as_mask(mask) -> FilterMask:
    if isinstance(mask, FilterMask):
        return mask
    if isinstance(mask, str):
        return FilterMask.preset(mask) if mask in PRESETS else FilterMask.from_file(mask)
    return FilterMask(mask)


def term_offsets(k: int) -> tuple:
    """(row index u, column index v), both 1-based, for 0-based term k."""
    return k % 3 + 1, k // 3 + 1


def complete_orthogonal(first_column) -> np.ndarray:
    """Orthogonal matrix whose first column is ``first_column`` (normalised).

    Same result as Gram-Schmidt over ``[c, e_0, e_1, ...]``. That sequence
    loses exactly one canonical vector, ``e_last`` with ``last`` the final
    non-zero index of ``c``, so the completion is the Q factor of
    ``[c, e_j (j != last)]`` with the signs fixed to make R's diagonal positive.
    """
    col = np.asarray(first_column, dtype=float)
    dim = col.size
    col = col / np.linalg.norm(col)
    last = int(np.flatnonzero(np.abs(col) > 1e-12)[-1])
    A = np.empty((dim, dim))
    A[:, 0] = col
    A[:, 1:] = np.delete(np.eye(dim), last, axis=1)
    Q, R = np.linalg.qr(A)
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


@dataclass(frozen=True)
class LcuPlan:
    """Immutable recipe for one convolution pass.

    ``terms`` holds ``(mu, v, beta)`` where mu is the column offset index and
    v the row offset index (both 1..3) and ``beta = w[v-1, mu-1]``.
    The 16x16 ancilla matrices ``S`` (first column beta / N_c) and
    ``prepare`` (first column sqrt(|beta| / lambda)) are completed on first use.
    """

    mask: FilterMask
    terms: tuple
    norm: float
    subnormalization: float
    uncompute: str = SDAGGER

    @property
    def betas(self) -> np.ndarray:
        return np.array([t[2] for t in self.terms])

    @property
    def signs(self) -> np.ndarray:
        return np.where(self.betas < 0, -1.0, 1.0)

    @property
    def s_column(self) -> np.ndarray:
        col = np.zeros(ANCILLA_DIM)
        col[:9] = self.betas / self.norm
        return col

    @property
    def prepare_column(self) -> np.ndarray:
        col = np.zeros(ANCILLA_DIM)
        col[:9] = np.sqrt(np.abs(self.betas) / self.subnormalization)
        return col

    @cached_property
    def S(self) -> np.ndarray:
        return _completed(self.s_column)

    @cached_property
    def prepare(self) -> np.ndarray:
        return _completed(self.prepare_column)


def _completed(col) -> np.ndarray:
    m = complete_orthogonal(col)
    m[:, 0] = col
    m.setflags(write=False)
    return m


def build_plan(mask, uncompute: str = SDAGGER) -> LcuPlan:
    mask = as_mask(mask)
    if uncompute not in UNCOMPUTE:
        raise ValueError(f"uncompute must be one of {UNCOMPUTE}")
    terms = []
    for k in range(9):
        v, mu = term_offsets(k)
        terms.append((mu, v, float(mask.w[v - 1, mu - 1])))
    betas = np.array([t[2] for t in terms])
    norm = float(np.sqrt(np.sum(betas ** 2)))
    lam = float(np.sum(np.abs(betas)))
    return LcuPlan(mask, tuple(terms), norm, lam, uncompute)


def dense_u_prime(mask, M: int) -> np.ndarray:
    """Explicit M^2 x M^2 block-circulant filter operator (test oracle).

    Built from the V'_1, V'_2, V'_3 blocks: inside block V'_mu, row i holds
    w[0, mu] at column i-1, w[1, mu] at i and w[2, mu] at i+1 (cyclically);
    block row J holds V'_1, V'_2, V'_3 at block columns J-1, J, J+1.
    """
    w = as_mask(mask).w
    blocks = []
    for mu in range(3):
        V = np.zeros((M, M))
        for i in range(M):
            V[i, (i - 1) % M] += w[0, mu]
            V[i, i] += w[1, mu]
            V[i, (i + 1) % M] += w[2, mu]
        blocks.append(V)
    U = np.zeros((M * M, M * M))
    for J in range(M):
        for mu, off in zip(range(3), (-1, 0, 1)):
            Jc = (J + off) % M
            U[J * M:(J + 1) * M, Jc * M:(Jc + 1) * M] += blocks[mu]
    return U


def hadamard_matrix(num_qubits: int = NUM_ANCILLA) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    parity = np.vectorize(lambda x: bin(x).count("1") & 1)(idx[:, None] & idx[None, :])
    return (1 - 2 * parity) / np.sqrt(1 << num_qubits)


_H4 = hadamard_matrix()


def branch_masks(plan: LcuPlan) -> list:
    """The 16 masks realised on ancilla outcomes 0..15 under Hadamard uncompute.

    Entry (v, mu) of mask i is w[v, mu] times the sign of H^{(x)4}[i, k] for
    the term k = 3*mu + v that carries that weight.
    """
    signs = np.sign(_H4)
    out = []
    for i in range(ANCILLA_DIM):
        w = np.zeros((3, 3))
        for k in range(9):
            u, v = term_offsets(k)
            w[u - 1, v - 1] = signs[i, k] * plan.mask.w[u - 1, v - 1]
        out.append(w)
    # branch masks may be all zero for degenerate inputs, so return arrays
    return out


@dataclass
class ConvOutcome:
    """Result of one convolution pass.

    For ``sdagger`` the state is the renormalised work register after
    postselection. For ``hadamard`` it is the full pre-measurement register
    (work qubits low, ancilla high). In both cases ``rescale * branch`` gives
    U'|f> unnormalised, where ``branch`` is the renormalised ancilla-0 work state.
    """

    state: QuantumState
    success_probability: float
    rescale: float
    uncompute: str
    work_qubits: int

    def accepted_state(self) -> QuantumState:
        if self.uncompute == SDAGGER:
            return self.state
        branch = self.state.amplitudes[: 1 << self.work_qubits]
        return QuantumState(self.work_qubits, branch / np.sqrt(self.success_probability))

    def branch_amplitudes(self) -> np.ndarray:
        """(16, 2^n) unnormalised work amplitudes per ancilla outcome (hadamard only)."""
        if self.uncompute != HADAMARD:
            raise ValueError("branch amplitudes are only kept under hadamard uncompute")
        return self.state.amplitudes.reshape(ANCILLA_DIM, -1)


def _select_roll(block: np.ndarray, M: int, k: int) -> np.ndarray:
    u, v = term_offsets(k)
    grid = block.reshape(M, M)  # grid[j, i]: column j, row i
    return np.roll(grid, (2 - v, 2 - u), axis=(0, 1)).reshape(-1)


def _work_size(state: QuantumState) -> int:
    n = state.num_qubits
    if n % 2 or n < 2:
        raise ValueError(f"work register must hold an even number (>= 2) of qubits, got {n}")
    return 1 << (n // 2)


def run_convolution(state: QuantumState, plan: LcuPlan, noise: NoiseChannel | None = None,
                    via: str = "permutation") -> ConvOutcome:
    """Execute the LCU circuit on an amplitude-encoded square image.

    Ancilla qubits are appended above the work register. Noise (if given) is
    injected after each top-level step: preparation, the nine selects and the
    uncompute (op indices 0..10). With basic-gate granularity the gate-level
    path is used and every elementary gate is an injection point.
    """
    M = _work_size(state)
    n = state.num_qubits
    if via not in ("permutation", "gates"):
        raise ValueError("via must be 'permutation' or 'gates'")
    if noise is not None and noise.probability == 0.0:
        noise = None
    if noise is not None and noise.granularity == "basic-gate":
        via = "gates"
    elif noise is not None and via == "permutation" and noise.quiet(range(11), n + NUM_ANCILLA):
        noise = None  # this trajectory draws no Pauli at any step
    if via == "gates":
        amps = _run_gate_level(state, plan, noise)
    elif noise is None and plan.uncompute == SDAGGER:
        amps = _accepted_branch(state, plan, M)
    else:
        amps = _run_permutation(state, plan, noise, M)
    total = n + NUM_ANCILLA
    branch = amps[0]
    prob = float(np.vdot(branch, branch).real)
    if plan.uncompute == SDAGGER:
        if prob <= ZERO_PROBABILITY:
            raise ZeroProbabilityError(
                f"ancilla |0000> has probability {prob:.1e}: the filtered image is zero")
        return ConvOutcome(QuantumState(n, branch / np.sqrt(prob)), prob,
                           plan.subnormalization * np.sqrt(prob), SDAGGER, n)
    rescale = ANCILLA_DIM ** 0.5 * plan.norm * np.sqrt(prob)
    return ConvOutcome(QuantumState(total, amps.reshape(-1)), prob, rescale, HADAMARD, n)


def _accepted_branch(state, plan, M):
    """Noise-free shortcut: only the ancilla-0 row survives postselection.

    Row 0 after unprepare is sum_k P[k,0] * sign_k * Q_k (P[k,0] f), i.e.
    sum_k |beta_k| / lambda * sign_k * Q_k f. Returns a (1, 2^n) array.
    """
    f = state.amplitudes
    real = not np.iscomplexobj(f) or not np.any(f.imag)
    f = f.real if real else f
    weights = plan.prepare_column[:9] ** 2 * plan.signs
    out = np.zeros_like(f)
    for k in range(9):
        if weights[k] != 0.0:
            out += weights[k] * _select_roll(f, M, k)
    return out[None, :].astype(complex)


def _run_permutation(state, plan, noise, M):
    n = state.num_qubits
    total = n + NUM_ANCILLA
    amps = np.zeros((ANCILLA_DIM, 1 << n), dtype=complex)
    amps[0] = state.amplitudes
    sdag = plan.uncompute == SDAGGER
    prep = plan.prepare if sdag else plan.S
    amps = prep @ amps
    amps = inject_into(amps, total, noise, 0)
    signs = plan.signs
    for k in range(9):
        rolled = _select_roll(amps[k], M, k)
        amps[k] = -rolled if (sdag and signs[k] < 0) else rolled
        amps = inject_into(amps, total, noise, 1 + k)
    amps = (prep.T @ amps) if sdag else (_H4 @ amps)
    return inject_into(amps, total, noise, 10)


def controlled_q_gates(plan: LcuPlan, k: int, work_qubits: int) -> list:
    """Gate list for Q_k on the work register, controlled on ancilla value k."""
    q = work_qubits // 2
    anc = tuple(range(work_qubits, work_qubits + NUM_ANCILLA))
    anc_vals = tuple((k >> j) & 1 for j in range(NUM_ANCILLA))
    u, v = term_offsets(k)
    gates = []
    for offset_index, base in ((u, 0), (v, q)):
        if offset_index == 2:
            continue
        direction = "inc" if offset_index == 1 else "dec"
        for g in compile_shift(q, direction).gates:
            targets = tuple(t + base for t in g.targets)
            controls = tuple(c + base for c in g.controls) + anc
            values = tuple(g.control_values) + anc_vals
            gates.append(Gate("MCX", targets, controls, values))
    if plan.uncompute == SDAGGER and plan.signs[k] < 0:
        gates.append(Gate("CU", (0,), anc, anc_vals, matrix=-np.eye(2)))
    return gates


def _basic_gates(gate: Gate) -> list:
    """Expand an MCX (any control values) into X, CNOT and single-qubit gates."""
    if gate.kind != "MCX":
        return [gate]
    flips = [Gate("X", (c,)) for c, v in zip(gate.controls, gate.control_values) if v == 0]
    return flips + expand_mcx(Gate("MCX", gate.targets, gate.controls)) + flips


def _run_gate_level(state, plan, noise):
    n = state.num_qubits
    total = n + NUM_ANCILLA
    anc = tuple(range(n, total))
    full = state.tensor(QuantumState.zero(NUM_ANCILLA))
    sdag = plan.uncompute == SDAGGER
    prep = plan.prepare if sdag else plan.S
    unprep = prep.T if sdag else _H4
    basic = noise is not None and noise.granularity == "basic-gate"
    op = 0

    def step(st, gate):
        nonlocal op
        st = apply_gate(st, gate)
        if noise is not None:
            st = QuantumState(total, inject_into(st.amplitudes, total, noise, op))
        op += 1
        return st

    full = step(full, Gate("CU", anc, matrix=prep))
    for k in range(9):
        gates = controlled_q_gates(plan, k, n)
        if basic:
            for g in gates:
                for e in _basic_gates(g):
                    full = step(full, e)
        else:
            for g in gates:
                full = apply_gate(full, g)
            if noise is not None:
                full = QuantumState(total, inject_into(full.amplitudes, total, noise, op))
            op += 1
    full = step(full, Gate("CU", anc, matrix=unprep))
    return full.amplitudes.reshape(ANCILLA_DIM, -1)


def filter_image(image, mask, uncompute: str = SDAGGER, noise: NoiseChannel | None = None):
    """Encode, convolve and decode a square power-of-two image.

    Returns ``(filtered_image, outcome)``; the image is rescaled to the
    unnormalised U' F.
    """
    from qcnn.imaging import decode, encode

    st, rec = encode(image)
    plan = build_plan(mask, uncompute)
    out = run_convolution(st, plan, noise)
    return decode(out.accepted_state(), rec, out.rescale), out
