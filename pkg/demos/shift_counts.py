"""
Cost of a cyclic shift in basic gates
=====================================

A +1 shift on q qubits is a cascade of multi-controlled X gates. Without
ancillas, each of those expands into CNOTs and single-qubit rotations at a
cost that grows quadratically with the number of controls, so the whole
shift grows roughly cubically in q. This script prints the counts and the
local growth exponent between neighbouring sizes.
"""

import numpy as np

from qcnn import compile_shift, count_basic_gates

print(f"{'q':>3} {'gates':>8} {'local exponent':>15}")
prev = None
for q in range(1, 17):
    n = count_basic_gates(q)
    exponent = "" if prev is None or prev[1] == 0 else f"{np.log(n / prev[1]) / np.log(q / prev[0]):15.2f}"
    print(f"{q:3d} {n:8d} {exponent}")
    prev = (q, n)

# The logical circuit for three qubits, before expansion:
for gate in compile_shift(3).gates:
    print(gate.kind, "target", gate.targets, "controls", gate.controls)
