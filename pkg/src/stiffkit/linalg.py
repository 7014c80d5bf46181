"""Small dense linear algebra: skew matrices, rigid transforms, symmetric
eigendecomposition with numerical rank, and Frobenius block inversion.

Six-vectors are ordered ``[linear x, y, z | angular x, y, z]`` everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import NotSymmetric, SingularBlock

RANK_RTOL = 1e-9
RANK_FLOOR = 1e-300
SYMMETRY_RTOL = 1e-9


def skew(v) -> np.ndarray:
    """Cross-product matrix: ``skew(v) @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def unit(v, tol: float = 1e-14) -> np.ndarray:
    """Normalize ``v``; vectors already unit within ``tol`` are returned as-is.

    Leaving near-unit vectors untouched keeps repeated normalization bitwise
    idempotent, which the JSON round trip relies on.
    """
    a = np.asarray(v, dtype=float).copy()
    n = float(np.linalg.norm(a))
    if n == 0.0 or not np.isfinite(n):
        raise ValueError(f"cannot normalize vector {v!r}")
    if abs(n - 1.0) <= tol:
        return a
    return a / n


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid motion ``x -> rotation @ x + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = _readonly(self.rotation)
        t = _readonly(self.translation)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ValueError("non-finite transform")
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-12 or abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise ValueError("rotation is not proper orthonormal")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.eye(3), np.asarray(t, dtype=float))

    @classmethod
    def from_rpy(cls, rpy=(0.0, 0.0, 0.0), translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Fixed-axis roll/pitch/yaw, ``R = Rz(yaw) Ry(pitch) Rx(roll)``."""
        rpy = np.asarray(rpy, dtype=float)
        R = np.eye(3) if not rpy.any() else Rotation.from_euler("xyz", rpy).as_matrix()
        return cls(R, np.asarray(translation, dtype=float))

    def rpy(self) -> np.ndarray:
        if np.array_equal(self.rotation, np.eye(3)):
            return np.zeros(3)
        return Rotation.from_matrix(self.rotation).as_euler("xyz")

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def apply(self, p) -> np.ndarray:
        return self.rotation @ np.asarray(p, dtype=float) + self.translation

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)


@dataclass(frozen=True, eq=False)
class SymEig:
    values: np.ndarray
    vectors: np.ndarray
    numerical_rank: int
    threshold: float

    @property
    def null_space(self) -> np.ndarray:
        """Orthonormal kernel basis as columns (possibly zero columns)."""
        n = len(self.values)
        mask = np.abs(self.values) <= self.threshold
        return self.vectors[:, mask] if n else self.vectors


def rank_threshold(values) -> float:
    values = np.asarray(values)
    scale = float(np.abs(values).max()) if values.size else 0.0
    return max(RANK_RTOL * scale, RANK_FLOOR)


def sym_eig(A) -> SymEig:
    """Eigendecomposition of a symmetric matrix with numerical rank.

    Raises
    ------
    NotSymmetric
        If ``||A - A^T||_F > 1e-9 ||A||_F``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    norm = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > SYMMETRY_RTOL * norm:
        raise NotSymmetric("matrix asymmetry exceeds tolerance")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    tau = rank_threshold(w)
    return SymEig(_readonly(w), _readonly(V), int(np.count_nonzero(np.abs(w) > tau)), tau)


def numerical_rank(A) -> int:
    """Rank of an arbitrary (possibly rectangular) matrix at the relative 1e-9 threshold."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.count_nonzero(s > rank_threshold(s)))


def _check_pivot(P: np.ndarray, name: str) -> None:
    if P.size == 0:
        return
    s = np.linalg.svd(P, compute_uv=False)
    if s[-1] <= rank_threshold(s):
        ratio = s[-1] / s[0] if s[0] > 0 else 0.0
        raise SingularBlock(f"{name} block is rank-deficient (sigma_min/sigma_max = {ratio:.3e})")


def frobenius_block_inverse(M, k: int) -> np.ndarray:
    """Invert ``M = [[A, B], [C, D]]`` with ``A`` of size ``k x k`` blockwise.

    Uses the Schur complement ``S = D - C A^{-1} B``::

        M^{-1} = [[A^{-1} + A^{-1} B S^{-1} C A^{-1}, -A^{-1} B S^{-1}],
                  [-S^{-1} C A^{-1},                    S^{-1}        ]]
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or not 0 < k <= n:
        raise ValueError("M must be square and 0 < k <= n")
    A, B = M[:k, :k], M[:k, k:]
    C, D = M[k:, :k], M[k:, k:]
    _check_pivot(A, "leading")
    Ainv = np.linalg.inv(A)
    if k == n:
        return Ainv
    AiB = Ainv @ B
    CAi = C @ Ainv
    S = D - C @ AiB
    _check_pivot(S, "Schur complement")
    Sinv = np.linalg.inv(S)
    out = np.empty_like(M)
    out[:k, :k] = Ainv + AiB @ Sinv @ CAi
    out[:k, k:] = -AiB @ Sinv
    out[k:, :k] = -Sinv @ CAi
    out[k:, k:] = Sinv
    return out


def rel_fro(A, B) -> float:
    """Relative Frobenius deviation ``||A - B|| / max(||A||, ||B||)`` (0 for two zeros)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    scale = max(np.linalg.norm(A), np.linalg.norm(B))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(A - B) / scale)
