# cython: language_level=3
"""Compiled RK4 kernels for y'' = -M(t) y.

The stiffness M(t) is passed pre-sampled on the half-step lattice:
``w2[2k]`` at ``t0 + k h`` and ``w2[2k + 1]`` at ``t0 + (k + 1/2) h``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def rk4_scalar(double[::1] w2, double h, double complex y0, double complex dy0):
    """Integrate a scalar linear oscillator; returns (y, dy) at every node."""
    cdef Py_ssize_t n = (w2.shape[0] - 1) // 2
    cdef Py_ssize_t k
    out_y = np.empty(n + 1, dtype=np.complex128)
    out_dy = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] ys = out_y
    cdef double complex[::1] dys = out_dy
    cdef double complex y = y0, v = dy0
    cdef double complex k1y, k1v, k2y, k2v, k3y, k3v, k4y, k4v
    cdef double hh = 0.5 * h, h6 = h / 6.0
    cdef double wa, wm, wb
    ys[0] = y
    dys[0] = v
    for k in range(n):
        wa = w2[2 * k]
        wm = w2[2 * k + 1]
        wb = w2[2 * k + 2]
        k1y = v
        k1v = -wa * y
        k2y = v + hh * k1v
        k2v = -wm * (y + hh * k1y)
        k3y = v + hh * k2v
        k3v = -wm * (y + hh * k2y)
        k4y = v + h * k3v
        k4v = -wb * (y + h * k3y)
        y = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v = v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        ys[k + 1] = y
        dys[k + 1] = v
    return out_y, out_dy


cdef inline void _matvec(double[:, :, ::1] m, Py_ssize_t s, double complex[:, ::1] x,
                         double complex[:, ::1] out) noexcept nogil:
    # out = -M[s] @ x
    cdef Py_ssize_t d = x.shape[0], c = x.shape[1]
    cdef Py_ssize_t i, j, l
    cdef double complex acc
    for i in range(d):
        for l in range(c):
            acc = 0.0
            for j in range(d):
                acc = acc + m[s, i, j] * x[j, l]
            out[i, l] = -acc


def rk4_matrix(double[:, :, ::1] w2, double h, y0, dy0):
    """Matrix version: y is (d, c), w2 is (2n + 1, d, d). Returns (n + 1, d, c) arrays."""
    cdef Py_ssize_t n = (w2.shape[0] - 1) // 2
    cdef Py_ssize_t d = w2.shape[1]
    cdef double complex[:, ::1] y = np.ascontiguousarray(y0, dtype=np.complex128).copy()
    cdef double complex[:, ::1] v = np.ascontiguousarray(dy0, dtype=np.complex128).copy()
    cdef Py_ssize_t c = y.shape[1]
    out_y = np.empty((n + 1, d, c), dtype=np.complex128)
    out_dy = np.empty((n + 1, d, c), dtype=np.complex128)
    cdef double complex[:, :, ::1] ys = out_y
    cdef double complex[:, :, ::1] dys = out_dy
    cdef double complex[:, ::1] tmp = np.empty((d, c), dtype=np.complex128)
    cdef double complex[:, ::1] k1v = np.empty((d, c), dtype=np.complex128)
    cdef double complex[:, ::1] k2v = np.empty((d, c), dtype=np.complex128)
    cdef double complex[:, ::1] k3v = np.empty((d, c), dtype=np.complex128)
    cdef double complex[:, ::1] k4v = np.empty((d, c), dtype=np.complex128)
    cdef double hh = 0.5 * h, h6 = h / 6.0
    cdef Py_ssize_t k, i, l
    with nogil:
        ys[0, :, :] = y
        dys[0, :, :] = v
        for k in range(n):
            # k1y = v, k2y = v + hh k1v, k3y = v + hh k2v, k4y = v + h k3v
            _matvec(w2, 2 * k, y, k1v)
            for i in range(d):
                for l in range(c):
                    tmp[i, l] = y[i, l] + hh * v[i, l]
            _matvec(w2, 2 * k + 1, tmp, k2v)
            for i in range(d):
                for l in range(c):
                    tmp[i, l] = y[i, l] + hh * (v[i, l] + hh * k1v[i, l])
            _matvec(w2, 2 * k + 1, tmp, k3v)
            for i in range(d):
                for l in range(c):
                    tmp[i, l] = y[i, l] + h * (v[i, l] + hh * k2v[i, l])
            _matvec(w2, 2 * k + 2, tmp, k4v)
            for i in range(d):
                for l in range(c):
                    y[i, l] = y[i, l] + h6 * (
                        v[i, l] + 2.0 * (v[i, l] + hh * k1v[i, l])
                        + 2.0 * (v[i, l] + hh * k2v[i, l]) + (v[i, l] + h * k3v[i, l])
                    )
                    v[i, l] = v[i, l] + h6 * (k1v[i, l] + 2.0 * k2v[i, l] + 2.0 * k3v[i, l] + k4v[i, l])
            ys[k + 1, :, :] = y
            dys[k + 1, :, :] = v
    return out_y, out_dy
