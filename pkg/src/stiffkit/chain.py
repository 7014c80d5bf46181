"""Serial chain model at a frozen configuration: forward kinematics and the
screw Jacobians with respect to the virtual-spring and passive coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np
from scipy.linalg import block_diag
from scipy.spatial.transform import Rotation

from .linalg import RigidTransform, unit

JointKind = Literal["revolute", "prismatic"]
_KINDS = ("revolute", "prismatic")


def _check_kind(kind):
    if kind not in _KINDS:
        raise ValueError(f"joint kind must be one of {_KINDS}, got {kind!r}")


@dataclass(frozen=True, eq=False)
class RigidLink:
    transform: RigidTransform
    name: Optional[str] = None


@dataclass(frozen=True, eq=False)
class VirtualSpring6:
    """Six-dimensional link spring; ``K`` is expressed in the local frame."""

    K: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.shape != (6, 6) or not np.all(np.isfinite(K)):
            raise ValueError("spring matrix must be a finite 6x6 array")
        if np.linalg.norm(K - K.T) > 1e-12 * np.linalg.norm(K):
            raise ValueError("spring matrix is not symmetric")
        if np.linalg.eigvalsh(K).min() <= 0.0:
            raise ValueError("spring matrix is not positive-definite")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)


@dataclass(frozen=True, eq=False)
class ActuatedJoint:
    axis: np.ndarray
    kind: JointKind
    stiffness: float
    name: Optional[str] = None

    def __post_init__(self):
        _check_kind(self.kind)
        if not (np.isfinite(self.stiffness) and self.stiffness > 0):
            raise ValueError("actuator stiffness must be positive")
        a = unit(self.axis)
        a.setflags(write=False)
        object.__setattr__(self, "axis", a)
        object.__setattr__(self, "stiffness", float(self.stiffness))


@dataclass(frozen=True, eq=False)
class PassiveJoint:
    axis: np.ndarray
    kind: JointKind
    name: Optional[str] = None

    def __post_init__(self):
        _check_kind(self.kind)
        a = unit(self.axis)
        a.setflags(write=False)
        object.__setattr__(self, "axis", a)


ChainElement = Union[RigidLink, VirtualSpring6, ActuatedJoint, PassiveJoint]


@dataclass(frozen=True, eq=False)
class ChainModel:
    name: str
    elements: tuple = ()
    base_pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for e in self.elements:
            if not isinstance(e, (RigidLink, VirtualSpring6, ActuatedJoint, PassiveJoint)):
                raise TypeError(f"unknown chain element {e!r}")

    @property
    def n_theta(self) -> int:
        return sum(6 if isinstance(e, VirtualSpring6) else 1
                   for e in self.elements if isinstance(e, (VirtualSpring6, ActuatedJoint)))

    @property
    def n_q(self) -> int:
        return sum(1 for e in self.elements if isinstance(e, PassiveJoint))

    @property
    def passive_joints(self) -> list:
        return [e for e in self.elements if isinstance(e, PassiveJoint)]

    def passive_label(self, i: int) -> str:
        j = self.passive_joints[i]
        return j.name if j.name else f"passive[{i}]"

    def spring_stiffness(self) -> np.ndarray:
        """Block-diagonal K_theta in element order (1x1 actuators, 6x6 link springs)."""
        blocks = []
        for e in self.elements:
            if isinstance(e, VirtualSpring6):
                blocks.append(e.K)
            elif isinstance(e, ActuatedJoint):
                blocks.append(np.array([[e.stiffness]]))
        if not blocks:
            return np.zeros((0, 0))
        return block_diag(*blocks)


@dataclass(frozen=True, eq=False)
class JacobianPair:
    J_theta: np.ndarray
    J_q: np.ndarray
    end_pose: RigidTransform

    @property
    def end_point(self) -> np.ndarray:
        return self.end_pose.translation


@dataclass(frozen=True)
class JointScrew:
    """Global placement of one elementary joint coordinate."""

    role: Literal["theta", "q"]
    kind: JointKind
    axis: np.ndarray
    point: np.ndarray
    element: int


def _motion(kind: str, axis: np.ndarray, delta: float) -> RigidTransform:
    if kind == "prismatic":
        return RigidTransform.from_translation(axis * delta)
    return RigidTransform(Rotation.from_rotvec(axis * delta).as_matrix(), np.zeros(3))


_SPRING_AXES = [("prismatic", e) for e in np.eye(3)] + [("revolute", e) for e in np.eye(3)]


def _walk(chain: ChainModel, theta=None, q=None):
    """Traverse the chain; returns (end pose, list of JointScrew at the nominal frames)."""
    theta = np.zeros(chain.n_theta) if theta is None else np.asarray(theta, dtype=float)
    q = np.zeros(chain.n_q) if q is None else np.asarray(q, dtype=float)
    if theta.shape != (chain.n_theta,) or q.shape != (chain.n_q,):
        raise ValueError("joint displacement vectors have the wrong length")
    pose = chain.base_pose
    screws = []
    it = iq = 0
    for idx, e in enumerate(chain.elements):
        if isinstance(e, RigidLink):
            pose = pose @ e.transform
        elif isinstance(e, VirtualSpring6):
            for kind, a in _SPRING_AXES:
                screws.append(JointScrew("theta", kind, pose.rotation @ a, pose.translation, idx))
            if np.any(theta[it:it + 6]):
                d = theta[it:it + 6]
                pose = pose @ RigidTransform(Rotation.from_rotvec(d[3:]).as_matrix(), d[:3])
            it += 6
        else:
            role = "theta" if isinstance(e, ActuatedJoint) else "q"
            screws.append(JointScrew(role, e.kind, pose.rotation @ e.axis, pose.translation, idx))
            if role == "theta":
                delta = theta[it]
                it += 1
            else:
                delta = q[iq]
                iq += 1
            if delta != 0.0:
                pose = pose @ _motion(e.kind, e.axis, delta)
    return pose, screws


def forward_kinematics(chain: ChainModel, theta=None, q=None) -> RigidTransform:
    """End-frame pose, optionally with small spring deflections ``theta`` and
    passive joint displacements ``q`` applied (both default to zero)."""
    return _walk(chain, theta, q)[0]


def screw_column(kind: str, axis, point, end_point) -> np.ndarray:
    """Unit screw ``[a x (t - p); a]`` (revolute) or ``[a; 0]`` (prismatic) at ``end_point``."""
    a = np.asarray(axis, dtype=float)
    if kind == "prismatic":
        return np.concatenate([a, np.zeros(3)])
    return np.concatenate([np.cross(a, np.asarray(end_point) - np.asarray(point)), a])


def joint_screws(chain: ChainModel) -> tuple[RigidTransform, list]:
    return _walk(chain)


def jacobians(chain: ChainModel) -> JacobianPair:
    end, screws = _walk(chain)
    t = end.translation
    th = [screw_column(s.kind, s.axis, s.point, t) for s in screws if s.role == "theta"]
    qs = [screw_column(s.kind, s.axis, s.point, t) for s in screws if s.role == "q"]
    J_theta = np.array(th).T if th else np.zeros((6, 0))
    J_q = np.array(qs).T if qs else np.zeros((6, 0))
    return JacobianPair(J_theta, J_q, end)


def pose_difference(a: RigidTransform, b: RigidTransform) -> np.ndarray:
    """Small-displacement twist from ``b`` to ``a``: ``[dp; rotvec(Ra Rb^T)]``."""
    rot = Rotation.from_matrix(a.rotation @ b.rotation.T).as_rotvec()
    return np.concatenate([a.translation - b.translation, rot])


def finite_difference_jacobians(chain: ChainModel, delta: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference J_theta and J_q; an oracle for :func:`jacobians`."""
    def column(role, i):
        n = chain.n_theta if role == "theta" else chain.n_q
        d = np.zeros(n)
        d[i] = delta
        kw_p = {role: d}
        kw_m = {role: -d}
        plus = forward_kinematics(chain, **kw_p)
        minus = forward_kinematics(chain, **kw_m)
        return pose_difference(plus, minus) / (2 * delta)

    Jt = np.array([column("theta", i) for i in range(chain.n_theta)]).T.reshape(6, chain.n_theta)
    Jq = np.array([column("q", i) for i in range(chain.n_q)]).T.reshape(6, chain.n_q)
    return Jt, Jq

