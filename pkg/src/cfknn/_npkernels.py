"""Pure-numpy fallback for the compiled kernels in ``_ckernels``."""

import numpy as np


def neighbor_mean(indptr, indices, x):
    n = indptr.shape[0] - 1
    out = np.zeros((n, x.shape[1]), dtype=np.float64)
    if indices.shape[0]:
        np.add.at(out, np.repeat(np.arange(n), np.diff(indptr)), x[indices])
    deg = np.diff(indptr)
    nz = deg > 0
    out[nz] /= deg[nz, None]
    return out


def sq_dists_to(emb, v):
    diff = emb - emb[v]
    return np.einsum("ij,ij->i", diff, diff)
