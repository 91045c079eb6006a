# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the dense-network hot path.

Matmuls go through BLAS (via scipy's exported dgemm pointer); elementwise
work runs in fused C loops.  Signatures mirror ``kernels_numpy``.
"""

import numpy as np

from libc.math cimport sqrt as c_sqrt
from scipy.linalg.cython_blas cimport dgemm


cdef void _gemm_c(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c,
                  bint trans_a, bint trans_b) noexcept nogil:
    """c = op(a) @ op(b) for C-contiguous buffers, evaluated as the
    transposed product in BLAS column-major order."""
    cdef int m, n, k
    if trans_a:
        m = a.shape[1]
        k = a.shape[0]
    else:
        m = a.shape[0]
        k = a.shape[1]
    if trans_b:
        n = b.shape[0]
    else:
        n = b.shape[1]
    cdef char flag_first = b'T' if trans_b else b'N'
    cdef char flag_second = b'T' if trans_a else b'N'
    cdef int ld_first = k if trans_b else n
    cdef int ld_second = m if trans_a else k
    cdef double one = 1.0, zero = 0.0
    dgemm(&flag_first, &flag_second, &n, &m, &k, &one,
          &b[0, 0], &ld_first, &a[0, 0], &ld_second, &zero, &c[0, 0], &n)


def dense_forward(double[:, ::1] x, double[:, ::1] w, double[::1] bias):
    cdef Py_ssize_t rows = x.shape[0], dout = w.shape[0]
    out = np.empty((rows, dout))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        _gemm_c(x, w, o, False, True)
        for i in range(rows):
            for j in range(dout):
                o[i, j] += bias[j]
    return out


def relu(double[:, ::1] z):
    cdef Py_ssize_t rows = z.shape[0], cols = z.shape[1]
    out = np.empty((rows, cols))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[i, j] = z[i, j] if z[i, j] > 0.0 else 0.0
    return out


def tanh_act(double[:, ::1] z):
    # numpy's SIMD tanh beats a scalar libm loop at these sizes
    return np.tanh(z)


def dense_backward_params(double[:, ::1] x, double[:, ::1] dout):
    cdef Py_ssize_t rows = dout.shape[0], cols = dout.shape[1]
    dw = np.empty((cols, x.shape[1]))
    db = np.zeros(cols)
    cdef double[:, ::1] dw_v = dw
    cdef double[::1] db_v = db
    cdef Py_ssize_t i, j
    with nogil:
        _gemm_c(dout, x, dw_v, True, False)
        for i in range(rows):
            for j in range(cols):
                db_v[j] += dout[i, j]
    return dw, db


def dense_backward_input(double[:, ::1] dout, double[:, ::1] w):
    dx = np.empty((dout.shape[0], w.shape[1]))
    cdef double[:, ::1] dx_v = dx
    with nogil:
        _gemm_c(dout, w, dx_v, False, False)
    return dx


def relu_backward(double[:, ::1] dout, double[:, ::1] z):
    cdef Py_ssize_t rows = z.shape[0], cols = z.shape[1]
    out = np.empty((rows, cols))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[i, j] = dout[i, j] if z[i, j] > 0.0 else 0.0
    return out


def tanh_backward(double[:, ::1] dout, double[:, ::1] y):
    cdef Py_ssize_t rows = y.shape[0], cols = y.shape[1]
    out = np.empty((rows, cols))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[i, j] = dout[i, j] * (1.0 - y[i, j] * y[i, j])
    return out


def adam_update(param, grad, m, v, long t, double lr, double beta1,
                double beta2, double eps):
    cdef double[::1] p_v = param.reshape(-1)
    cdef double[::1] g_v = grad.reshape(-1)
    cdef double[::1] m_v = m.reshape(-1)
    cdef double[::1] v_v = v.reshape(-1)
    cdef Py_ssize_t i, size = p_v.shape[0]
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double g
    with nogil:
        for i in range(size):
            g = g_v[i]
            m_v[i] = beta1 * m_v[i] + (1.0 - beta1) * g
            v_v[i] = beta2 * v_v[i] + (1.0 - beta2) * g * g
            p_v[i] -= lr * (m_v[i] / c1) / (c_sqrt(v_v[i] / c2) + eps)


def blend(dst, src, double tau):
    cdef double[::1] d_v = dst.reshape(-1)
    cdef double[::1] s_v = src.reshape(-1)
    cdef Py_ssize_t i, size = d_v.shape[0]
    with nogil:
        for i in range(size):
            d_v[i] = (1.0 - tau) * d_v[i] + tau * s_v[i]
