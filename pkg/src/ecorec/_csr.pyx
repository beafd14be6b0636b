# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR neighbor-mean kernels (hot loop of the graph aggregation)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def mean_neighbors(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                   const double[:, ::1] x):
    """out[v] = mean of x[u] over neighbors u of v; zero row if v is isolated."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = x.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t v, j, k
    cdef cnp.int64_t start, end, u
    cdef double inv
    for v in range(n):
        start = indptr[v]
        end = indptr[v + 1]
        if end == start:
            continue
        for j in range(start, end):
            u = indices[j]
            for k in range(d):
                out[v, k] += x[u, k]
        inv = 1.0 / (end - start)
        for k in range(d):
            out[v, k] *= inv
    return out_arr


def mean_neighbors_adjoint(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                           const double[:, ::1] g):
    """Transpose of mean_neighbors: out[u] += g[v] / deg(v) for every edge (v, u)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = g.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t v, j, k
    cdef cnp.int64_t start, end, u
    cdef double inv
    for v in range(n):
        start = indptr[v]
        end = indptr[v + 1]
        if end == start:
            continue
        inv = 1.0 / (end - start)
        for j in range(start, end):
            u = indices[j]
            for k in range(d):
                out[u, k] += g[v, k] * inv
    return out_arr
