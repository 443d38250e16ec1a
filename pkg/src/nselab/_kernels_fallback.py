"""Pure numpy implementations of the compiled kernels.

Used when the extension module is absent or explicitly disabled via
NSE_LAB_FORCE_FALLBACK. Signatures and results match `_kernels` exactly.
"""

import numpy as np


def contract_velocity_gradient(u, gradv):
    """w_i = sum_j u_j * (d_j v_i) pointwise; gradv[i, j] = d_j v_i."""
    return np.einsum("jxyz,ijxyz->ixyz", u, gradv)


def convolve_modes(ucoef, vcoef, modes, n):
    """Brute-force convolution over active mode pairs.

    Accumulates i * (u_hat(k) . l) * v_hat(l) into slot (k + l) mod n for
    every ordered pair of rows (k, l) of `modes`. Vectorized over l; for a
    fixed k the target slots k + l are pairwise distinct, so a fancy-index
    add is collision-free.
    """
    out = np.zeros((3, n, n, n), dtype=np.complex128)
    for a in range(modes.shape[0]):
        dots = 1j * (modes @ ucoef[a])
        contrib = dots[:, None] * vcoef
        m = (modes + modes[a]) % n
        out[:, m[:, 0], m[:, 1], m[:, 2]] += contrib.T
    return out
