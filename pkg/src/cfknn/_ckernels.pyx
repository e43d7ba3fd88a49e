# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: CSR neighbor-mean aggregation and squared distances.

These two primitives dominate the search loop (every candidate subgraph costs
one perturbed forward pass plus one nearest-neighbor query).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def neighbor_mean(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                  double[:, ::1] x):
    """Row i of the result is the mean of x over CSR neighbors of node i.

    Nodes with no neighbors get a zero row.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = x.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k, c, start, end
    cdef double inv
    for i in range(n):
        start = indptr[i]
        end = indptr[i + 1]
        if end == start:
            continue
        for j in range(start, end):
            c = indices[j]
            for k in range(d):
                o[i, k] += x[c, k]
        inv = 1.0 / (end - start)
        for k in range(d):
            o[i, k] *= inv
    return out


def sq_dists_to(double[:, ::1] emb, Py_ssize_t v):
    """Squared Euclidean distance from every row of emb to row v."""
    cdef Py_ssize_t n = emb.shape[0]
    cdef Py_ssize_t d = emb.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, k
    cdef double acc, diff
    for i in range(n):
        acc = 0.0
        for k in range(d):
            diff = emb[i, k] - emb[v, k]
            acc += diff * diff
        o[i] = acc
    return out
