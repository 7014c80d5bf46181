"""Pure-numpy kernels; same contract as the compiled ``_ckernels``."""
import numpy as np

NAME = "python"


def rank1_update(K, col, tau):
    u = K @ col
    mu = float(col @ u)
    if not mu > tau:
        return None, mu, u
    out = K - np.outer(u, u) / mu
    return 0.5 * (out + out.T), mu, u


def trivial_update(K, p, tau):
    kpp = float(K[p, p])
    if not kpp > tau:
        return None, kpp
    out = K - np.outer(K[:, p], K[p, :]) / kpp
    out = 0.5 * (out + out.T)
    out[p, :] = 0.0
    out[:, p] = 0.0
    return out, kpp


def reduce_columns(K, Jq, tau_rel):
    K = np.array(K, dtype=float)
    n = Jq.shape[1]
    mus = np.zeros(n)
    for i in range(n):
        col = Jq[:, i]
        u = K @ col
        mu = float(col @ u)
        mus[i] = mu
        if not mu > tau_rel * np.trace(K):
            return K, i, mus
        K = K - np.outer(u, u) / mu
        K = 0.5 * (K + K.T)
    return K, -1, mus


def transport(K, v):
    x, y, z = v
    Tinv = np.eye(6)
    Tinv[:3, 3:] = -np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    out = Tinv.T @ K @ Tinv
    return 0.5 * (out + out.T)
