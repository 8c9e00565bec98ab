# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused C implementation of the learner kernels.

Same contract as numpy_backend: forward_mlp returns the cached activations,
adam_step fuses backpropagation, the weight-gradient outer products, and the
Adam ascent update into single passes over each parameter block. Matrix-
vector products go through BLAS dgemv.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()


cdef void _gemv(double[:, ::1] a, double[::1] x, double[::1] y, bint transpose) noexcept:
    """y <- A @ x (transpose=False) or A.T @ x (transpose=True) for
    C-contiguous A, via BLAS on the implicit Fortran view of the buffer."""
    cdef int rows = a.shape[0]
    cdef int cols = a.shape[1]
    cdef int lda = cols
    cdef double alpha = 1.0
    cdef double beta = 0.0
    cdef int inc = 1
    # The buffer of C-order (rows, cols) is Fortran-order (cols, rows) of A.T,
    # so computing A @ x asks BLAS for the transposed product and vice versa.
    cdef char op = b'N' if transpose else b'T'
    dgemv(&op, &cols, &rows, &alpha, &a[0, 0], &lda, &x[0], &inc, &beta, &y[0], &inc)


cdef void _adam_mat(double[:, ::1] w, double[:, ::1] m, double[:, ::1] v,
                    double[::1] g_out, double[::1] act, double lr,
                    double c1, double c2, double beta1, double beta2,
                    double eps) noexcept:
    cdef Py_ssize_t i, j
    cdef double g, mi, vi
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            g = g_out[i] * act[j]
            mi = beta1 * m[i, j] + (1.0 - beta1) * g
            vi = beta2 * v[i, j] + (1.0 - beta2) * g * g
            m[i, j] = mi
            v[i, j] = vi
            w[i, j] += lr * (mi / c1) / (sqrt(vi / c2) + eps)


cdef void _adam_vec(double[::1] b, double[::1] m, double[::1] v,
                    double[::1] g, double lr, double c1, double c2,
                    double beta1, double beta2, double eps) noexcept:
    cdef Py_ssize_t i
    cdef double gi, mi, vi
    for i in range(b.shape[0]):
        gi = g[i]
        mi = beta1 * m[i] + (1.0 - beta1) * gi
        vi = beta2 * v[i] + (1.0 - beta2) * gi * gi
        m[i] = mi
        v[i] = vi
        b[i] += lr * (mi / c1) / (sqrt(vi / c2) + eps)


def forward_mlp(w0, b0, w1, b1, w2, b2, v):
    """Forward pass. Returns (h1, a1, h2, a2, o); o is the linear output."""
    cdef double[:, ::1] w0v = w0
    cdef double[:, ::1] w1v = w1
    cdef double[:, ::1] w2v = w2
    cdef double[::1] vv = v
    h1 = np.empty(w0.shape[0])
    h2 = np.empty(w1.shape[0])
    o = np.empty(w2.shape[0])
    cdef double[::1] h1v = h1
    cdef double[::1] h2v = h2
    cdef double[::1] ov = o
    cdef double[::1] b0v = b0
    cdef double[::1] b1v = b1
    cdef double[::1] b2v = b2
    cdef Py_ssize_t i

    _gemv(w0v, vv, h1v, False)
    for i in range(h1v.shape[0]):
        h1v[i] += b0v[i]
    a1 = np.maximum(h1, 0.0)
    cdef double[::1] a1v = a1

    _gemv(w1v, a1v, h2v, False)
    for i in range(h2v.shape[0]):
        h2v[i] += b1v[i]
    a2 = np.maximum(h2, 0.0)
    cdef double[::1] a2v = a2

    _gemv(w2v, a2v, ov, False)
    for i in range(ov.shape[0]):
        ov[i] += b2v[i]
    return h1, a1, h2, a2, o


def adam_step(weights, biases, m_w, v_w, m_b, v_b, v_in, cache, go, double lr,
              long t, double beta1=0.9, double beta2=0.999, double eps=1e-8):
    """Backward pass plus one in-place Adam ascent step (see numpy_backend)."""
    h1, a1, h2, a2 = cache
    cdef double[:, ::1] w0 = weights[0]
    cdef double[:, ::1] w1 = weights[1]
    cdef double[:, ::1] w2 = weights[2]
    cdef double[::1] gov = go
    cdef double[::1] h1v = h1
    cdef double[::1] h2v = h2
    cdef double c1 = 1.0 - beta1**t
    cdef double c2 = 1.0 - beta2**t
    cdef Py_ssize_t i

    ga2 = np.empty(w2.shape[1])
    ga1 = np.empty(w1.shape[1])
    cdef double[::1] ga2v = ga2
    cdef double[::1] ga1v = ga1

    _gemv(w2, gov, ga2v, True)
    for i in range(ga2v.shape[0]):
        if h2v[i] <= 0:
            ga2v[i] = 0.0
    _gemv(w1, ga2v, ga1v, True)
    for i in range(ga1v.shape[0]):
        if h1v[i] <= 0:
            ga1v[i] = 0.0

    _adam_mat(w2, m_w[2], v_w[2], gov, a2, lr, c1, c2, beta1, beta2, eps)
    _adam_vec(biases[2], m_b[2], v_b[2], gov, lr, c1, c2, beta1, beta2, eps)
    _adam_mat(w1, m_w[1], v_w[1], ga2v, a1, lr, c1, c2, beta1, beta2, eps)
    _adam_vec(biases[1], m_b[1], v_b[1], ga2v, lr, c1, c2, beta1, beta2, eps)
    _adam_mat(w0, m_w[0], v_w[0], ga1v, v_in, lr, c1, c2, beta1, beta2, eps)
    _adam_vec(biases[0], m_b[0], v_b[0], ga1v, lr, c1, c2, beta1, beta2, eps)
