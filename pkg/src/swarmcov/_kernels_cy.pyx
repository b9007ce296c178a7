# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled basis-evaluation kernels; see _kernels_py for the contract."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def basis_block(const double[:, ::1] points, const double[:, ::1] freq, const double[::1] hinv):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t v = points.shape[1]
    cdef Py_ssize_t M = freq.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((P, M))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, i, d
    cdef double acc
    for p in range(P):
        for i in range(M):
            acc = hinv[i]
            for d in range(v):
                acc *= cos(freq[i, d] * points[p, d])
            o[p, i] = acc
    return out


def basis_grad_block(const double[:, ::1] points, const double[:, ::1] freq, const double[::1] hinv):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t v = points.shape[1]
    cdef Py_ssize_t M = freq.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((P, M, v))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t p, i, d, e
    cdef double acc
    for p in range(P):
        for i in range(M):
            for d in range(v):
                acc = -hinv[i] * freq[i, d] * sin(freq[i, d] * points[p, d])
                for e in range(v):
                    if e != d:
                        acc *= cos(freq[i, e] * points[p, e])
                o[p, i, d] = acc
    return out


def weighted_grad_sum(const double[:, ::1] points, const double[::1] weights,
                      const double[:, ::1] freq, const double[::1] hinv):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t v = points.shape[1]
    cdef Py_ssize_t M = freq.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((P, v))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, i, d, e
    cdef double acc
    for p in range(P):
        for i in range(M):
            for d in range(v):
                acc = -hinv[i] * freq[i, d] * sin(freq[i, d] * points[p, d])
                for e in range(v):
                    if e != d:
                        acc *= cos(freq[i, e] * points[p, e])
                o[p, d] += weights[i] * acc
    return out


def traj_coeffs(const double[:, ::1] points, const double[:, ::1] freq, const double[::1] hinv):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t v = points.shape[1]
    cdef Py_ssize_t M = freq.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(M)
    cdef double[::1] o = out
    cdef Py_ssize_t p, i, d
    cdef double acc
    for p in range(P):
        for i in range(M):
            acc = hinv[i]
            for d in range(v):
                acc *= cos(freq[i, d] * points[p, d])
            o[i] += acc
    for i in range(M):
        o[i] /= P
    return out
