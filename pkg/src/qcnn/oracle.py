"""Brute-force classical filtering, deliberately written as plain loops.

These are ground truth for the quantum pipeline, so they avoid numpy
tricks. Indices below are 0-based; mask offsets run over u, v in {0, 1, 2}
with the centre at (1, 1).
"""

import numpy as np


def cyclic_filter(image, mask) -> np.ndarray:
    """Cross-correlate ``image`` with the 3x3 ``mask`` using wrap-around borders."""
    F = np.asarray(image, dtype=float)
    W = np.asarray(mask, dtype=float)
    M, L = F.shape
    G = np.zeros((M, L))
    for i in range(M):
        for j in range(L):
            acc = 0.0
            for u in range(3):
                for v in range(3):
                    acc += W[u, v] * F[(i + u - 1) % M, (j + v - 1) % L]
            G[i, j] = acc
    return G


def interior_filter(image, mask) -> np.ndarray:
    """Non-cyclic filter on interior pixels; border pixels are copied from the input."""
    F = np.asarray(image, dtype=float)
    W = np.asarray(mask, dtype=float)
    M, L = F.shape
    G = F.copy()
    for i in range(1, M - 1):
        for j in range(1, L - 1):
            acc = 0.0
            for u in range(3):
                for v in range(3):
                    acc += W[u, v] * F[i + u - 1, j + v - 1]
            G[i, j] = acc
    return G


def interior(image) -> np.ndarray:
    return np.asarray(image)[1:-1, 1:-1]


def interior_matches(quantum_output, image, mask, atol: float = 1e-9) -> bool:
    """True when the interior of a filtered image equals the non-cyclic filter there."""
    return bool(np.allclose(interior(quantum_output), interior(interior_filter(image, mask)),
                            atol=atol, rtol=0))


def shift_oracle(image, row_offset: int, col_offset: int) -> np.ndarray:
    """Output pixel (i, j) takes input pixel (i + row_offset, j + col_offset), cyclically."""
    F = np.asarray(image, dtype=float)
    M, L = F.shape
    G = np.empty_like(F)
    for i in range(M):
        for j in range(L):
            G[i, j] = F[(i + row_offset) % M, (j + col_offset) % L]
    return G
