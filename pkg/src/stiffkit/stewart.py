"""Stewart-Gough case-study platforms with UPS legs and their closed-form
stiffness matrices.

Case A attaches the legs at six angles 60 degrees apart on both plates
(radial legs). Case B attaches them in three coincident pairs 120 degrees
apart on the base; each pair splits by +-60 degrees on the platform, so the
legs cross between neighbouring pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .chain import ActuatedJoint, ChainModel, PassiveJoint, RigidLink, VirtualSpring6
from .errors import DegenerateGeometry, InputError
from .linalg import RigidTransform, unit
from .parallel import Assembly, LegAttachment
from .serial import StiffnessMatrix

DEFAULT_LINK_RATIO = 1e6


@dataclass(frozen=True)
class StewartParams:
    R: float
    r: float
    h: float
    K11: float
    case: Literal["A", "B"] = "A"
    k_link: Optional[float] = None

    def __post_init__(self):
        for name in ("R", "r", "h", "K11"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise InputError(f"{name} must be positive, got {val}")
        if self.k_link is not None and not (np.isfinite(self.k_link) and self.k_link > 0):
            raise InputError(f"k_link must be positive, got {self.k_link}")
        if self.case not in ("A", "B"):
            raise InputError(f"case must be 'A' or 'B', got {self.case!r}")

    @property
    def link_stiffness(self) -> float:
        return self.k_link if self.k_link is not None else DEFAULT_LINK_RATIO * self.K11

    @property
    def d_a(self) -> float:
        return self.R - self.r

    @property
    def d_b(self) -> float:
        return self.R / 2 - self.r

    @property
    def leg_length(self) -> float:
        R, r, h = self.R, self.r, self.h
        if self.case == "A":
            return float(np.sqrt(h**2 + (R - r) ** 2))
        return float(np.sqrt(h**2 + R**2 + r**2 - R * r))

    @property
    def effective_K11(self) -> float:
        """Actuator in series with the axial compliance of the link spring."""
        return 1.0 / (1.0 / self.K11 + 1.0 / self.link_stiffness)


@dataclass(frozen=True, eq=False)
class LegGeometry:
    base_point: np.ndarray
    platform_point: np.ndarray
    u0: np.ndarray
    v: np.ndarray  # platform centre -> platform attachment point

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.platform_point - self.base_point))


def attachment_angles(case: str) -> tuple[np.ndarray, np.ndarray]:
    """Base and platform attachment angles in radians for legs 0..5."""
    i = np.arange(6)
    if case == "A":
        base = np.deg2rad(60.0 * i)
        return base, base.copy()
    base = np.deg2rad(120.0 * (i // 2))
    plat = base + np.deg2rad(60.0) * np.where(i % 2 == 0, 1.0, -1.0)
    return base, plat


def leg_geometries(params: StewartParams) -> list[LegGeometry]:
    beta, pi_ = attachment_angles(params.case)
    centre = np.array([0.0, 0.0, params.h])
    legs = []
    for b_ang, p_ang in zip(beta, pi_):
        b = np.array([params.R * np.cos(b_ang), params.R * np.sin(b_ang), 0.0])
        p = np.array([params.r * np.cos(p_ang), params.r * np.sin(p_ang), params.h])
        d = p - b
        L = np.linalg.norm(d)
        if not L > 0:
            raise DegenerateGeometry("leg of zero length")
        legs.append(LegGeometry(b, p, d / L, p - centre))
    _check_distinct(legs)
    return legs


def _check_distinct(legs: Sequence[LegGeometry]) -> None:
    for i in range(len(legs)):
        for j in range(i + 1, len(legs)):
            same_b = np.allclose(legs[i].base_point, legs[j].base_point, atol=1e-12)
            same_p = np.allclose(legs[i].platform_point, legs[j].platform_point, atol=1e-12)
            if same_b and same_p:
                raise DegenerateGeometry(f"legs {i} and {j} coincide")


def universal_axes(u0) -> tuple[np.ndarray, np.ndarray]:
    """Two unit axes completing ``u0`` to a right-handed triad ``(a1, a2, u0)``.

    Gram-Schmidt against the global axis least aligned with ``u0``.
    """
    u = np.asarray(u0, dtype=float)
    e = np.zeros(3)
    e[int(np.argmin(np.abs(u)))] = 1.0
    a1 = unit(e - (e @ u) * u)
    a2 = np.cross(u, a1)
    return a1, a2


def build_leg_model(geom: LegGeometry, params: StewartParams, *, name: str = "leg",
                    link_spring: bool = True) -> ChainModel:
    """UPS leg: U-joint at the base, 6-DOF link spring, actuated prismatic
    along the leg, rigid link to the platform, S-joint at the platform point.

    ``link_spring=False`` drops the link spring (actuator-only leg).
    """
    L = geom.length
    a1, a2 = universal_axes(geom.u0)
    el = [
        RigidLink(RigidTransform.from_translation(geom.base_point), name="base_offset"),
        PassiveJoint(a1, "revolute", name="U1"),
        PassiveJoint(a2, "revolute", name="U2"),
    ]
    if link_spring:
        el.append(VirtualSpring6(params.link_stiffness * np.eye(6), name="link"))
    el += [
        ActuatedJoint(geom.u0, "prismatic", params.K11, name="actuator"),
        RigidLink(RigidTransform.from_translation(geom.u0 * L), name="leg"),
        PassiveJoint([1.0, 0.0, 0.0], "revolute", name="S1"),
        PassiveJoint([0.0, 1.0, 0.0], "revolute", name="S2"),
        PassiveJoint([0.0, 0.0, 1.0], "revolute", name="S3"),
    ]
    return ChainModel(name, tuple(el))


def build_case(params: StewartParams, *, link_spring: bool = True) -> Assembly:
    legs = []
    for i, g in enumerate(leg_geometries(params)):
        chain = build_leg_model(g, params, name=f"leg{i}", link_spring=link_spring)
        legs.append(LegAttachment(chain, g.v))
    ref = RigidTransform.from_translation([0.0, 0.0, params.h])
    return Assembly(tuple(legs), ref, name=f"stewart_{params.case}")


def leg_wrench(geom: LegGeometry) -> np.ndarray:
    """Unit leg force line at the platform reference point, ``[u0; v x u0]``."""
    return np.concatenate([geom.u0, np.cross(geom.v, geom.u0)])


def analytic_rank1_sum(legs: Sequence[LegGeometry], K11: float) -> StiffnessMatrix:
    """``K11 * sum_i w_i w_i^T`` with ``w_i = [u_i; v_i x u_i]``."""
    K = np.zeros((6, 6))
    for g in legs:
        w = leg_wrench(g)
        K = K + np.outer(w, w)
    return StiffnessMatrix(K11 * K)


def analytic_case_matrix(params: StewartParams, K11: Optional[float] = None) -> StiffnessMatrix:
    """Closed-form platform stiffness for case A or B.

    ``K11`` overrides the actuator stiffness (e.g. with
    :attr:`StewartParams.effective_K11`).
    """
    k = params.K11 if K11 is None else K11
    R, r, h = params.R, params.r, params.h
    L2 = params.leg_length**2
    if params.case == "A":
        diag = params.d_a**2
        c = r * h * params.d_a
        k66 = 0.0
    else:
        diag = params.d_a**2 + R * r
        c = r * h * params.d_b
        k66 = 1.5 * r**2 * R**2
    M = np.zeros((6, 6))
    M[0, 0] = M[1, 1] = diag
    M[2, 2] = 2 * h**2
    M[3, 3] = M[4, 4] = r**2 * h**2
    M[5, 5] = k66
    M[0, 4] = M[4, 0] = c
    M[1, 3] = M[3, 1] = -c
    return StiffnessMatrix(3 * k / L2 * M)
