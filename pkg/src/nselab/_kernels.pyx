# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pointwise convective contraction and the
brute-force mode-pair convolution used as a cross-check oracle."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def contract_velocity_gradient(double[:, :, :, ::1] u, double[:, :, :, :, ::1] gradv):
    """w_i = sum_j u_j * (d_j v_i), all in physical space.

    u has shape (3, n, n, n), gradv has shape (3, 3, n, n, n) with
    gradv[i, j] = d_j v_i. Returns (3, n, n, n).
    """
    cdef Py_ssize_t n0 = u.shape[1], n1 = u.shape[2], n2 = u.shape[3]
    cdef Py_ssize_t i, x, y, z
    out_arr = np.empty((3, n0, n1, n2), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    with nogil:
        for i in range(3):
            for x in range(n0):
                for y in range(n1):
                    for z in range(n2):
                        out[i, x, y, z] = (
                            u[0, x, y, z] * gradv[i, 0, x, y, z]
                            + u[1, x, y, z] * gradv[i, 1, x, y, z]
                            + u[2, x, y, z] * gradv[i, 2, x, y, z]
                        )
    return out_arr


def convolve_modes(const double complex[:, ::1] ucoef, const double complex[:, ::1] vcoef,
                   const int[:, ::1] modes, int n):
    """Direct double sum over active mode pairs of the advection product.

    For every pair (k, l) of rows of `modes` this accumulates
    i * (u_hat(k) . l) * v_hat(l) into output slot (k + l) mod n.
    The result is the raw transform of (u . grad) v; the caller still
    dealiases and projects. Cost is O(n_active^2), so callers guard the
    grid size.
    """
    cdef Py_ssize_t na = ucoef.shape[0]
    cdef Py_ssize_t a, b
    cdef int mx, my, mz
    cdef double complex dot, w
    out_arr = np.zeros((3, n, n, n), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] out = out_arr
    with nogil:
        for a in range(na):
            for b in range(na):
                dot = (ucoef[a, 0] * modes[b, 0]
                       + ucoef[a, 1] * modes[b, 1]
                       + ucoef[a, 2] * modes[b, 2])
                w = 1j * dot
                mx = (modes[a, 0] + modes[b, 0]) % n
                my = (modes[a, 1] + modes[b, 1]) % n
                mz = (modes[a, 2] + modes[b, 2]) % n
                if mx < 0:
                    mx += n
                if my < 0:
                    my += n
                if mz < 0:
                    mz += n
                out[0, mx, my, mz] = out[0, mx, my, mz] + w * vcoef[b, 0]
                out[1, mx, my, mz] = out[1, mx, my, mz] + w * vcoef[b, 1]
                out[2, mx, my, mz] = out[2, mx, my, mz] + w * vcoef[b, 2]
    return out_arr
