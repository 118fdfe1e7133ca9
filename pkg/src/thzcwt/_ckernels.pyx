# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled correlation kernel for the wavelet transform.

Same contract and tap order as ``_pykernels.correlate``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def correlate(const double[:, ::1] padded, Py_ssize_t pad, Py_ssize_t n,
              const double[:, ::1] kernels, const Py_ssize_t[::1] half,
              const double[::1] norm, Py_ssize_t stride):
    cdef Py_ssize_t m = padded.shape[0]
    cdef Py_ssize_t s = kernels.shape[0]
    cdef Py_ssize_t centre = (kernels.shape[1] - 1) // 2
    cdef Py_ssize_t nb = (n + stride - 1) // stride
    out_arr = np.empty((m, s, nb), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t r, si, j, k, h, base
    cdef double acc
    with nogil:
        for r in range(m):
            for si in range(s):
                h = half[si]
                for j in range(nb):
                    base = pad + j * stride
                    acc = 0.0
                    for k in range(-h, h + 1):
                        acc = acc + kernels[si, centre + k] * padded[r, base + k]
                    out[r, si, j] = acc * norm[si]
    return out_arr
