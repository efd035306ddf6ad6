# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

The recursive filters perform the same floating-point operations in the
same order as the pure-Python versions (the extension is compiled with
fp-contraction disabled), so generated series match bit for bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def garch_filter(
    double[::1] eps,
    double omega,
    double alpha,
    double beta,
    double sigma2_init,
    double e_init,
):
    cdef Py_ssize_t n = eps.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef double sigma2 = sigma2_init
    cdef double e_prev = e_init
    cdef Py_ssize_t t
    for t in range(n):
        sigma2 = omega + alpha * (e_prev * e_prev) + beta * sigma2
        e_prev = sqrt(sigma2) * eps[t]
        o[t] = e_prev
    return out


def ar1_filter(double[::1] u, double coeff, double y_init):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef double y = y_init
    cdef Py_ssize_t t
    for t in range(n):
        y = coeff * y + u[t]
        o[t] = y
    return out


def bartlett_lrv(double[::1] u, int lag):
    cdef Py_ssize_t n = u.shape[0]
    cdef double total = 0.0
    cdef double acc
    cdef Py_ssize_t t, ell
    for t in range(n):
        total += u[t] * u[t]
    for ell in range(1, lag + 1):
        acc = 0.0
        for t in range(ell, n):
            acc += u[t] * u[t - ell]
        total += 2.0 * (1.0 - ell / (lag + 1.0)) * acc
    return total / n


def bartlett_lrv_matrix(double[:, ::1] u, int lag):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = u.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((k, k))
    cdef double[:, ::1] o = out
    cdef double weight, acc
    cdef Py_ssize_t t, ell, i, j
    for i in range(k):
        for j in range(k):
            acc = 0.0
            for t in range(n):
                acc += u[t, i] * u[t, j]
            o[i, j] = acc
    for ell in range(1, lag + 1):
        weight = 1.0 - ell / (lag + 1.0)
        for i in range(k):
            for j in range(k):
                acc = 0.0
                for t in range(ell, n):
                    acc += u[t, i] * u[t - ell, j]
                o[i, j] += weight * acc
                o[j, i] += weight * acc
    return out / n
