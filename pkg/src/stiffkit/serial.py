"""Cartesian stiffness of one serial chain with passive joints.

Four routes to the same matrix:

* :func:`dense_kkt_stiffness` inverts the bordered compliance system directly
  (reference oracle, also valid when the springs alone do not span 6 DOF);
* :func:`closed_form_stiffness` subtracts the passive-joint reduction term
  from the locked-chain stiffness in one step;
* :func:`recursive_reduce` applies the same reduction group by group, and
  :func:`rank1_update` / :func:`trivial_update` are its single-column forms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import kernels
from .chain import ChainModel, JacobianPair, jacobians, joint_screws
from .errors import (DeficientSprings, NotSymmetric, RedundantPassiveJoint,
                     SingularSystem)
from .linalg import SymEig, numerical_rank, rank_threshold, sym_eig

PIVOT_RTOL = 1e-12
PSD_RTOL = 1e-9


class StiffnessMatrix:
    """Symmetric 6x6 Cartesian stiffness with lazily cached spectral data."""

    __slots__ = ("K", "__dict__")

    def __init__(self, K):
        K = np.array(K, dtype=float)
        if K.shape != (6, 6):
            raise ValueError(f"stiffness must be 6x6, got {K.shape}")
        if np.linalg.norm(K - K.T) > PSD_RTOL * np.linalg.norm(K):
            raise NotSymmetric("stiffness matrix is not symmetric")
        K.setflags(write=False)
        self.K = K

    def __array__(self, dtype=None, copy=None):
        return self.K if dtype is None else self.K.astype(dtype)

    def __repr__(self):
        return f"StiffnessMatrix(rank={self.rank}, trace={np.trace(self.K):.6g})"

    @cached_property
    def eig(self) -> SymEig:
        return sym_eig(self.K)

    @property
    def rank(self) -> int:
        return self.eig.numerical_rank

    @property
    def eigenvalues(self) -> np.ndarray:
        # clamp sub-threshold negatives (rounding noise) to zero
        w = self.eig.values.copy()
        w[(w < 0) & (w > -PSD_RTOL * max(np.abs(w).max(), 0.0))] = 0.0
        return w

    @property
    def null_space(self) -> np.ndarray:
        return self.eig.null_space

    @property
    def is_psd(self) -> bool:
        w = self.eig.values
        return bool(w.min() >= -PSD_RTOL * max(w.max(), 0.0))

    @property
    def is_positive_definite(self) -> bool:
        return self.rank == 6 and self.is_psd

    @property
    def asymmetry(self) -> float:
        n = np.linalg.norm(self.K)
        return 0.0 if n == 0 else float(np.linalg.norm(self.K - self.K.T) / n)

    def trace(self) -> float:
        return float(np.trace(self.K))


def _as_array(K) -> np.ndarray:
    return K.K if isinstance(K, StiffnessMatrix) else np.asarray(K, dtype=float)


@dataclass
class ReductionStep:
    columns: tuple
    pivot: object  # scalar mu for one column, matrix for a group
    u: np.ndarray  # K_i J_q^i, shape (6,) or (6, g)
    rank_before: int
    rank_after: int


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def rank_drops(self) -> list:
        return [s.rank_before - s.rank_after for s in self.steps]


def _pivot_tau(K: np.ndarray) -> float:
    return PIVOT_RTOL * float(np.trace(K))


def _sym(K):
    return 0.5 * (K + K.T)


# --------------------------------------------------------------------------
# locked chain and the dense oracle


def _compliance(jp: JacobianPair, K_theta) -> np.ndarray:
    K_theta = np.asarray(K_theta, dtype=float)
    n = jp.J_theta.shape[1]
    if K_theta.shape != (n, n):
        raise ValueError(f"K_theta must be {n}x{n}, got {K_theta.shape}")
    if n == 0:
        return np.zeros((6, 6))
    try:
        cho = sla.cho_factor(K_theta)
    except np.linalg.LinAlgError:
        raise ValueError("spring stiffness K_theta is not positive-definite") from None
    C = jp.J_theta @ sla.cho_solve(cho, jp.J_theta.T)
    return _sym(C)


def base_stiffness(jp: JacobianPair, K_theta) -> StiffnessMatrix:
    """Stiffness of the chain with every passive joint locked,
    ``K0 = (J_theta K_theta^-1 J_theta^T)^-1``.

    Raises
    ------
    DeficientSprings
        If ``rank(J_theta) < 6``; use :func:`dense_kkt_stiffness` instead.
    """
    r = numerical_rank(jp.J_theta)
    if r < 6:
        raise DeficientSprings(f"rank(J_theta) = {r} < 6: springs do not span all six directions")
    C = _compliance(jp, K_theta)
    try:
        cho = sla.cho_factor(C)
    except np.linalg.LinAlgError:
        raise DeficientSprings("locked-chain compliance is not positive-definite") from None
    return StiffnessMatrix(_sym(sla.cho_solve(cho, np.eye(6))))


def kkt_matrix(jp: JacobianPair, K_theta) -> np.ndarray:
    """Bordered system ``[[J_theta K_theta^-1 J_theta^T, J_q], [J_q^T, 0]]``."""
    nq = jp.J_q.shape[1]
    M = np.zeros((6 + nq, 6 + nq))
    M[:6, :6] = _compliance(jp, K_theta)
    M[:6, 6:] = jp.J_q
    M[6:, :6] = jp.J_q.T
    return M


def dense_kkt_stiffness(jp: JacobianPair, K_theta) -> StiffnessMatrix:
    """Top-left 6x6 block of the inverse of :func:`kkt_matrix` (full LU)."""
    M = kkt_matrix(jp, K_theta)
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= M.shape[0] * np.finfo(float).eps * s[0]:
        raise SingularSystem(
            f"bordered system is singular (sigma_min/sigma_max = {s[-1] / s[0]:.3e}): "
            "redundant passive joints or springs/joints do not span 6 DOF")
    rhs = np.zeros((M.shape[0], 6))
    rhs[:6] = np.eye(6)
    X = sla.lu_solve(sla.lu_factor(M), rhs)
    return StiffnessMatrix(_sym(X[:6]))


# --------------------------------------------------------------------------
# closed form and recursion


def closed_form_stiffness(jp: JacobianPair, K_theta, *, project: bool = True
                          ) -> tuple[StiffnessMatrix, ReductionTrace]:
    """``K0 - K0 J_q (J_q^T K0 J_q)^-1 J_q^T K0`` in a single step.

    ``project`` applies :func:`project_out` to the result.
    """
    K0 = base_stiffness(jp, K_theta)
    Jq = jp.J_q
    if Jq.shape[1] == 0:
        return K0, ReductionTrace()
    U = K0.K @ Jq
    G = _sym(Jq.T @ U)
    w = np.linalg.eigvalsh(G)
    if w[0] <= rank_threshold(w):
        bad = _first_redundant_column(K0.K, Jq)
        raise RedundantPassiveJoint(
            "J_q^T K0 J_q is singular: passive joints are redundant"
            + (f" (column {bad})" if bad is not None else ""), column=bad)
    K = _sym(K0.K - U @ sla.cho_solve(sla.cho_factor(G), U.T))
    K = StiffnessMatrix(project_out(K, Jq) if project else K)
    step = ReductionStep(tuple(range(Jq.shape[1])), G, U, K0.rank, K.rank)
    return K, ReductionTrace([step])


def project_out(K, J_q) -> np.ndarray:
    """``P K P`` with ``P`` the orthogonal projector onto ``span(J_q)^perp``.

    The identity on any exact reduction result (``K J_q = 0``); numerically it
    removes the rounding residue that the subtraction leaves along the
    passive directions when the springs are much stiffer than the result.
    """
    if J_q.shape[1] == 0:
        return K
    Q, _ = np.linalg.qr(J_q)
    P = np.eye(6) - Q @ Q.T
    return _sym(P @ K @ P)


def _first_redundant_column(K, Jq) -> Optional[int]:
    _, fail, _ = kernels.active.reduce_columns(K, Jq, PIVOT_RTOL)
    if fail >= 0:
        return int(fail)
    # not caught by the scalar pivot test; fall back to column-rank growth
    for i in range(1, Jq.shape[1] + 1):
        if numerical_rank(Jq[:, :i]) < i:
            return i - 1
    return None


def rank1_update(K, jq_col, *, backend=None) -> StiffnessMatrix:
    """Remove one passive direction: ``K - u u^T / mu`` with ``u = K j``,
    ``mu = j^T K j``.

    Raises
    ------
    RedundantPassiveJoint
        If ``mu <= 1e-12 trace(K)``; the direction is already free.
    """
    Ka = np.ascontiguousarray(_as_array(K))
    col = np.ascontiguousarray(jq_col, dtype=float).reshape(6)
    tau = _pivot_tau(Ka)
    out, mu, _ = kernels.get(backend).rank1_update(Ka, col, tau)
    if out is None:
        raise RedundantPassiveJoint(f"pivot mu = {mu:.3e} <= {tau:.3e}: direction already free")
    return StiffnessMatrix(out)


def trivial_update(K, p: int, *, backend=None) -> StiffnessMatrix:
    """Axis-aligned passive joint (screw ``e_p``, ``p`` in 1..6):
    ``K_jk - K_jp K_pk / K_pp``; row and column ``p`` become zero."""
    if not 1 <= p <= 6:
        raise ValueError(f"axis index p must be in 1..6, got {p}")
    Ka = np.ascontiguousarray(_as_array(K))
    tau = _pivot_tau(Ka)
    out, kpp = kernels.get(backend).trivial_update(Ka, p - 1, tau)
    if out is None:
        raise RedundantPassiveJoint(f"K_pp = {kpp:.3e} <= {tau:.3e}: direction already free", column=p)
    return StiffnessMatrix(out)


def _check_partition(partition, n):
    seen = [i for g in partition for i in g]
    if sorted(seen) != list(range(n)):
        raise ValueError(f"partition must cover columns 0..{n - 1} exactly once, got {partition}")


def recursive_reduce(K0, J_q, partition: Optional[Sequence[Sequence[int]]] = None, *,
                     trace: bool = True, project: bool = True, backend=None) -> tuple[StiffnessMatrix, ReductionTrace]:
    """Apply the passive-joint reduction group by group.

    ``partition`` lists groups of J_q column indices in application order; the
    default is one singleton group per column in natural order. Singleton
    groups go through the scalar kernel. With ``trace=False`` no per-step
    rank is computed and a run of singleton groups is handed to the kernel
    in one call. ``project`` applies :func:`project_out` to the final matrix.
    """
    K = np.ascontiguousarray(_as_array(K0), dtype=float)
    J_q = np.asarray(J_q, dtype=float).reshape(6, -1)
    n = J_q.shape[1]
    if partition is None:
        partition = [(i,) for i in range(n)]
    partition = [tuple(int(i) for i in g) for g in partition]
    _check_partition(partition, n)
    kern = kernels.get(backend)
    tr = ReductionTrace()

    if not trace and all(len(g) == 1 for g in partition):
        order = [g[0] for g in partition]
        out, fail, mus = kern.reduce_columns(K, np.asfortranarray(J_q[:, order]), PIVOT_RTOL)
        if fail >= 0:
            raise RedundantPassiveJoint(
                f"pivot for column {order[fail]} is {mus[fail]:.3e}: passive direction already free",
                column=order[fail])
        return StiffnessMatrix(project_out(out, J_q) if project else out), tr

    rank = sym_eig(K).numerical_rank if trace else None
    for g in partition:
        Jg = J_q[:, list(g)]
        tau = _pivot_tau(K)
        if len(g) == 1:
            out, mu, u = kern.rank1_update(K, np.ascontiguousarray(Jg[:, 0]), tau)
            if out is None:
                raise RedundantPassiveJoint(
                    f"pivot for column {g[0]} is {mu:.3e} <= {tau:.3e}: passive direction already free",
                    column=g[0])
            pivot = mu
        else:
            u = K @ Jg
            pivot = _sym(Jg.T @ u)
            w = np.linalg.eigvalsh(pivot)
            if not w[0] > tau:
                bad = _first_redundant_column(K, Jg)
                col = g[bad] if bad is not None else g[0]
                raise RedundantPassiveJoint(
                    f"pivot block for columns {g} is singular (min eigenvalue {w[0]:.3e})", column=col)
            out = _sym(K - u @ sla.cho_solve(sla.cho_factor(pivot), u.T))
        K = np.ascontiguousarray(out)
        if trace:
            new_rank = sym_eig(K).numerical_rank
            tr.steps.append(ReductionStep(g, pivot, u, rank, new_rank))
            rank = new_rank
    return StiffnessMatrix(project_out(K, J_q) if project else K), tr


# --------------------------------------------------------------------------
# trivial joints


class JointClass(str, Enum):
    TRIVIAL_TRANSLATIONAL = "trivial-translational"
    TRIVIAL_ROTATIONAL = "trivial-rotational"
    QUASI_TRIVIAL = "quasi-trivial"
    GENERAL = "general"


AXIS_TOL = 1e-9


def _aligned_axis(a: np.ndarray) -> Optional[int]:
    i = int(np.argmax(np.abs(a)))
    off = np.delete(a, i)
    return i if np.linalg.norm(off) <= AXIS_TOL else None


def classify_passive_joint(chain: ChainModel, joint: int) -> tuple[JointClass, Optional[int]]:
    """Classify passive joint number ``joint`` (index into J_q columns).

    Returns the class and, for the trivial classes, the axis index ``p`` in
    1..6 whose unit vector equals the joint screw up to sign.
    """
    end, screws = joint_screws(chain)
    qs = [s for s in screws if s.role == "q"]
    s = qs[joint]
    i = _aligned_axis(s.axis)
    if i is None:
        return JointClass.GENERAL, None
    if s.kind == "prismatic":
        return JointClass.TRIVIAL_TRANSLATIONAL, i + 1
    d = s.point - end.translation
    d_perp = d - (d @ s.axis) * s.axis
    if np.linalg.norm(d_perp) <= AXIS_TOL * max(1.0, np.linalg.norm(d)):
        return JointClass.TRIVIAL_ROTATIONAL, i + 4
    if _aligned_axis(d_perp) is not None:
        return JointClass.QUASI_TRIVIAL, None
    return JointClass.GENERAL, None


def naive_zeroed_stiffness(K0, trivial_indices: Iterable[int]) -> StiffnessMatrix:
    """Zero the listed rows/columns (1-based) without any coupling correction.

    Correct only when ``K0`` is diagonal; kept to demonstrate the discrepancy.
    """
    K = np.array(_as_array(K0), dtype=float)
    for p in trivial_indices:
        if not 1 <= p <= 6:
            raise ValueError(f"axis index must be in 1..6, got {p}")
        K[p - 1, :] = 0.0
        K[:, p - 1] = 0.0
    return StiffnessMatrix(K)


# --------------------------------------------------------------------------
# soft-spring limit


@dataclass
class SoftSpringReport:
    epsilons: list
    errors: list
    ratios: list
    monotone: bool
    first_order: bool

    @property
    def ok(self) -> bool:
        return self.monotone and self.first_order


def soft_spring_stiffness(jp: JacobianPair, K_theta, eps: float) -> StiffnessMatrix:
    """Chain stiffness with each passive joint replaced by a spring of stiffness ``eps``."""
    J = np.hstack([jp.J_theta, jp.J_q])
    nq = jp.J_q.shape[1]
    Kt = sla.block_diag(np.asarray(K_theta, dtype=float), eps * np.eye(nq))
    return base_stiffness(JacobianPair(J, np.zeros((6, 0)), jp.end_pose), Kt)


def passive_stiffness_scale(jp: JacobianPair, K_theta) -> float:
    """``1 / trace((J_q^T K0 J_q)^-1)``: harmonic stiffness of the locked chain
    along its passive directions; soft springs well below it are in the
    first-order regime."""
    K0 = base_stiffness(jp, K_theta)
    if jp.J_q.shape[1] == 0:
        return K0.trace()
    G = _sym(jp.J_q.T @ K0.K @ jp.J_q)
    return 1.0 / float(np.trace(np.linalg.inv(G)))


def soft_spring_check(jp: JacobianPair, K_theta, epsilon_sequence: Sequence[float]) -> SoftSpringReport:
    """Distance of the soft-spring stiffness from the closed-form result for
    each ``eps``; the error must shrink linearly with ``eps``."""
    Kc, _ = closed_form_stiffness(jp, K_theta)
    eps = [float(e) for e in epsilon_sequence]
    errs = [float(np.linalg.norm(soft_spring_stiffness(jp, K_theta, e).K - Kc.K)) for e in eps]
    ratios, monotone, first_order = [], True, True
    for (e0, r0), (e1, r1) in itertools.pairwise(zip(eps, errs)):
        if r0 == 0.0 and r1 == 0.0:
            ratios.append(float("nan"))
            continue
        ratio = r0 / r1 if r1 > 0 else float("inf")
        ratios.append(ratio)
        monotone &= r1 < r0
        expect = e0 / e1
        first_order &= expect / 10 <= ratio <= expect * 10
    return SoftSpringReport(eps, errs, ratios, bool(monotone), bool(first_order))


# --------------------------------------------------------------------------
# convenience


def chain_stiffness(chain: ChainModel, method: str = "auto", *, backend=None) -> StiffnessMatrix:
    """Stiffness at the chain end point by ``dense``, ``closed``, ``recursive`` or ``auto``."""
    jp = jacobians(chain)
    Kt = chain.spring_stiffness()
    if method == "auto":
        method = "closed" if numerical_rank(jp.J_theta) == 6 else "dense"
    if method == "dense":
        return dense_kkt_stiffness(jp, Kt)
    if method == "closed":
        return closed_form_stiffness(jp, Kt)[0]
    if method == "recursive":
        return recursive_reduce(base_stiffness(jp, Kt), jp.J_q, trace=False, backend=backend)[0]
    raise ValueError(f"unknown method {method!r}")
