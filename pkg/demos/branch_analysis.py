"""
Where the other fifteen outcomes go
===================================

With a Hadamard layer as the uncompute step, every ancilla outcome carries a
filtered copy of the image. Outcome i applies the original mask with some
weights flipped in sign, following row i of the 16x16 Hadamard matrix.
This script lists those masks and checks each branch against a classical
filter with the same mask.
"""

import numpy as np

from qcnn import HADAMARD, PRESETS, branch_masks, build_plan, cyclic_filter, encode, run_convolution
from qcnn.imaging import unflatten

rng = np.random.default_rng(7)
image = rng.random((8, 8))
mask = PRESETS["sharpen"]

state, record = encode(image)
plan = build_plan(mask, HADAMARD)
outcome = run_convolution(state, plan)
branches = outcome.branch_amplitudes().real

# Branch i equals (branch mask i applied to f) / (4 N_c), where N_c is the
# Frobenius norm of the mask, so multiplying back gives the filtered image.
scale = 4 * plan.norm * record.norm_factor
print(f"{'i':>2} {'prob':>8} {'max |err|':>10}  signs of the nine weights")
for i, wi in enumerate(branch_masks(plan)):
    got = unflatten(branches[i], 8, 8) * scale
    err = np.max(np.abs(got - cyclic_filter(image, wi)))
    prob = np.sum(branches[i] ** 2)
    signs = "".join("+" if s > 0 else "-" for s in np.sign(wi.T.reshape(-1)))
    print(f"{i:2d} {prob:8.4f} {err:10.2e}  {signs}")

print(f"total probability {np.sum(branches ** 2):.12f}")
