"""Relocating leg stiffness matrices to the platform reference point and
summing them into the manipulator stiffness (rigid platform)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .chain import ChainModel, forward_kinematics
from .errors import ModelValidationError
from .linalg import RigidTransform, skew
from .serial import StiffnessMatrix, _as_array, chain_stiffness

OFFSET_TOL = 1e-9


def transport_matrix(v) -> np.ndarray:
    """``[[I, (v x)], [0, I]]``; its inverse is ``transport_matrix(-v)``."""
    T = np.eye(6)
    T[:3, 3:] = skew(v)
    return T


def transport_stiffness(K, v, *, backend=None) -> StiffnessMatrix:
    """Congruence ``T(v)^-T K T(v)^-1`` with ``T = transport_matrix``.

    ``v`` points from the platform reference point to the leg end point, so a
    leg force ``f`` acting along ``u`` becomes the wrench ``[u; v x u]``.
    """
    v = np.asarray(v, dtype=float).reshape(3)
    Ka = np.ascontiguousarray(_as_array(K))
    return StiffnessMatrix(kernels.get(backend).transport(Ka, v))


@dataclass(frozen=True, eq=False)
class LegAttachment:
    chain: ChainModel
    v: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=float).reshape(3)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class Assembly:
    legs: tuple
    reference_pose: RigidTransform = field(default_factory=RigidTransform.identity)
    name: str = "assembly"

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(self.legs))
        if not self.legs:
            raise ModelValidationError("an assembly needs at least one leg")

    @property
    def reference_point(self) -> np.ndarray:
        return self.reference_pose.translation

    def chain(self, name: str) -> ChainModel:
        for leg in self.legs:
            if leg.chain.name == name:
                return leg.chain
        raise KeyError(name)

    def validate_offsets(self, tol: float = OFFSET_TOL) -> None:
        """Check each stored ``v`` against ``FK end point - reference point``."""
        for leg in self.legs:
            expected = forward_kinematics(leg.chain).translation - self.reference_point
            err = float(np.abs(expected - leg.v).max())
            if err > tol:
                raise ModelValidationError(
                    f"chain {leg.chain.name!r}: platform offset {leg.v.tolist()} disagrees with "
                    f"geometry {expected.tolist()} by {err:.3e} m")


def aggregate(assembly: Assembly, leg_stiffnesses: Sequence, *, backend=None) -> StiffnessMatrix:
    """Sum of the leg stiffnesses transported to the reference point, in leg order."""
    if len(leg_stiffnesses) != len(assembly.legs):
        raise ValueError(f"expected {len(assembly.legs)} leg stiffnesses, got {len(leg_stiffnesses)}")
    total = np.zeros((6, 6))
    for leg, K in zip(assembly.legs, leg_stiffnesses):
        total = total + transport_stiffness(K, leg.v, backend=backend).K
    return StiffnessMatrix(total)


def leg_stiffnesses(assembly: Assembly, method: str = "auto", *, backend=None) -> list:
    return [chain_stiffness(leg.chain, method, backend=backend) for leg in assembly.legs]


def assembly_stiffness(assembly: Assembly, method: str = "auto", *, backend=None) -> StiffnessMatrix:
    return aggregate(assembly, leg_stiffnesses(assembly, method, backend=backend), backend=backend)
