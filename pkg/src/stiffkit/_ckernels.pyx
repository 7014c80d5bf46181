# cython: language_level=3
"""Compiled 6x6 kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


cdef inline void _symmetrize(double[:, ::1] K) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double m
    for j in range(6):
        for k in range(j + 1, 6):
            m = 0.5 * (K[j, k] + K[k, j])
            K[j, k] = m
            K[k, j] = m


cdef inline bint _rank1(double[:, ::1] K, const double[:] col, double[::1] u, double tau,
                        double* mu_out) noexcept nogil:
    # K -= u u^T / mu in place when mu > tau; returns whether it was applied.
    cdef Py_ssize_t j, k
    cdef double mu = 0.0, s
    for j in range(6):
        s = 0.0
        for k in range(6):
            s += K[j, k] * col[k]
        u[j] = s
    for j in range(6):
        mu += col[j] * u[j]
    mu_out[0] = mu
    if not mu > tau:
        return False
    for j in range(6):
        for k in range(6):
            K[j, k] = K[j, k] - (u[j] * u[k]) / mu
    _symmetrize(K)
    return True


def rank1_update(K, col, double tau):
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.array(K, dtype=np.float64, order="C")
    cdef const double[::1] c = np.ascontiguousarray(col, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] u = np.empty(6)
    cdef double mu
    if not _rank1(out, c, u, tau, &mu):
        return None, mu, u
    return out, mu, u


def trivial_update(K, int p, double tau):
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.array(K, dtype=np.float64, order="C")
    cdef double[:, ::1] o = out
    cdef double kpp = o[p, p]
    cdef double colp[6]
    cdef Py_ssize_t j, k
    if not kpp > tau:
        return None, kpp
    for j in range(6):
        colp[j] = o[j, p]
    for j in range(6):
        for k in range(6):
            o[j, k] = o[j, k] - (colp[j] * colp[k]) / kpp
    _symmetrize(o)
    for j in range(6):
        o[p, j] = 0.0
        o[j, p] = 0.0
    return out, kpp


def reduce_columns(K, Jq, double tau_rel):
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.array(K, dtype=np.float64, order="C")
    cdef double[:, ::1] o = out
    cdef const double[::1, :] J = np.asfortranarray(Jq, dtype=np.float64)
    cdef Py_ssize_t n = J.shape[1], i, j
    cdef cnp.ndarray[double, ndim=1] mus = np.zeros(n)
    cdef double[::1] m = mus
    cdef double[::1] u = np.empty(6)
    cdef double tr
    cdef Py_ssize_t fail = -1
    with nogil:
        for i in range(n):
            tr = 0.0
            for j in range(6):
                tr += o[j, j]
            if not _rank1(o, J[:, i], u, tau_rel * tr, &m[i]):
                fail = i
                break
    return out, fail, mus


def transport(K, v):
    cdef const double[:, ::1] k = np.ascontiguousarray(K, dtype=np.float64)
    cdef double x = v[0], y = v[1], z = v[2]
    cdef double S[3][3]
    cdef double tmp[6][6]
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.empty((6, 6))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    # Tinv = [[I, -S], [0, I]], out = Tinv^T K Tinv
    S[0][0] = 0.0; S[0][1] = -z; S[0][2] = y
    S[1][0] = z; S[1][1] = 0.0; S[1][2] = -x
    S[2][0] = -y; S[2][1] = x; S[2][2] = 0.0
    # tmp = K Tinv: left columns unchanged, right columns = K[:, 3:] - K[:, :3] S
    for i in range(6):
        for j in range(3):
            tmp[i][j] = k[i, j]
            tmp[i][3 + j] = k[i, 3 + j] - (k[i, 0] * S[0][j] + k[i, 1] * S[1][j] + k[i, 2] * S[2][j])
    # out = Tinv^T tmp: top rows unchanged, bottom rows = tmp[3:] + S tmp[:3]
    # (Tinv^T bottom-left block is (-S)^T = S)
    for j in range(6):
        for i in range(3):
            o[i, j] = tmp[i][j]
            o[3 + i, j] = tmp[3 + i][j] + (S[i][0] * tmp[0][j] + S[i][1] * tmp[1][j] + S[i][2] * tmp[2][j])
    _symmetrize(o)
    return out
