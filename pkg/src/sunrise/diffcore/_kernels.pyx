# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: fused dense layers over BLAS dgemm, Adam, Polyak.

Arrays are C-contiguous float64. Row-major products are issued to the
column-major BLAS as transposed problems, so no copies are made.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline void _gemm(bint trans_a, bint trans_b, int M, int N, int K,
                       double* A, int a_cols, double* B, int b_cols,
                       double beta, double* C) noexcept nogil:
    # Row-major C[M, N] = op(A)[M, K] @ op(B)[K, N] + beta * C.
    # a_cols / b_cols are the stored column counts of A and B.
    cdef char ta = b'T' if trans_a else b'N'
    cdef char tb = b'T' if trans_b else b'N'
    cdef double one = 1.0
    dgemm(&tb, &ta, &N, &M, &K, &one, B, &b_cols, A, &a_cols, &beta, C, &N)


def dense_forward(cnp.ndarray x, cnp.ndarray W, cnp.ndarray b, bint relu):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int B = xv.shape[0]
    cdef int I = xv.shape[1]
    cdef int O = Wv.shape[1]
    cdef cnp.ndarray y = np.empty((B, O), dtype=np.float64)
    cdef double[:, ::1] yv = y
    cdef int r, c
    cdef double t
    if B == 0 or O == 0:
        return y
    if I > 0:
        _gemm(False, False, B, O, I, &xv[0, 0], I, &Wv[0, 0], O, 0.0, &yv[0, 0])
    else:
        y.fill(0.0)
    for r in range(B):
        for c in range(O):
            t = yv[r, c] + bv[c]
            if relu and t < 0.0:
                t = 0.0
            yv[r, c] = t
    return y


def dense_backward(cnp.ndarray x, cnp.ndarray W, cnp.ndarray y, cnp.ndarray gy,
                   bint relu, bint need_gx, bint need_gw):
    """Return ``(gx, gW, gb)``; entries not requested are ``None``."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] gyv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef int B = xv.shape[0]
    cdef int I = xv.shape[1]
    cdef int O = Wv.shape[1]
    cdef cnp.ndarray g
    cdef double[:, ::1] gv
    cdef int r, c
    cdef cnp.ndarray gx = None
    cdef cnp.ndarray gW = None
    cdef cnp.ndarray gb = None
    cdef double[::1] gbv
    if relu:
        g = np.empty((B, O), dtype=np.float64)
        gv = g
        for r in range(B):
            for c in range(O):
                gv[r, c] = gyv[r, c] if yv[r, c] > 0.0 else 0.0
    else:
        gv = gyv
    if need_gx:
        gx = np.empty((B, I), dtype=np.float64) if O > 0 else np.zeros((B, I))
        if B > 0 and I > 0 and O > 0:
            _gemm(False, True, B, I, O, &gv[0, 0], O, &Wv[0, 0], O, 0.0,
                  <double*>cnp.PyArray_DATA(gx))
    if need_gw:
        gW = np.empty((I, O), dtype=np.float64) if B > 0 else np.zeros((I, O))
        gb = np.zeros(O, dtype=np.float64)
        gbv = gb
        if B > 0 and I > 0 and O > 0:
            _gemm(True, False, I, O, B, &xv[0, 0], I, &gv[0, 0], O, 0.0,
                  <double*>cnp.PyArray_DATA(gW))
        # row-major sweep; per-column order is still r = 0, 1, ..., B - 1
        for r in range(B):
            for c in range(O):
                gbv[c] = gbv[c] + gv[r, c]
    return gx, gW, gb


def adam_update(double[::1] theta, double[::1] grad, double[::1] m, double[::1] v,
                double lr, double beta1, double beta2, double eps, long step):
    """In-place bias-corrected Adam update; ``step`` is the post-increment count."""
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double c1 = 1.0 - beta1
    cdef double c2 = 1.0 - beta2
    cdef double bc1 = 1.0 - pow(beta1, <double>step)
    cdef double bc2 = 1.0 - pow(beta2, <double>step)
    cdef double gi
    with nogil:
        for i in range(n):
            gi = grad[i]
            m[i] = m[i] * beta1 + c1 * gi
            v[i] = v[i] * beta2 + c2 * (gi * gi)
            theta[i] = theta[i] - (lr * (m[i] / bc1)) / (sqrt(v[i] / bc2) + eps)


def polyak(double[::1] target, double[::1] live, double tau):
    cdef Py_ssize_t i, n = target.shape[0]
    with nogil:
        for i in range(n):
            target[i] = target[i] + tau * (live[i] - target[i])
