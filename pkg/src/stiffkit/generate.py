"""Seeded random serial chains for verification corpora and benchmarks."""
from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .chain import ActuatedJoint, ChainModel, PassiveJoint, RigidLink, VirtualSpring6, jacobians
from .linalg import RigidTransform


def random_spd(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    Q = Rotation.random(random_state=rng).as_matrix() if n == 3 else np.linalg.qr(rng.normal(size=(n, n)))[0]
    lam = rng.uniform(lo, hi, size=n)
    K = (Q * lam) @ Q.T
    return 0.5 * (K + K.T)


def _random_link(rng) -> RigidLink:
    R = Rotation.random(random_state=rng).as_matrix()
    return RigidLink(RigidTransform(R, rng.uniform(-0.5, 0.5, size=3)))


def _random_axis(rng) -> np.ndarray:
    a = rng.normal(size=3)
    return a / np.linalg.norm(a)


def _draw(rng, n_theta: int, n_q: int, name: str) -> ChainModel:
    n6 = int(rng.integers(0, n_theta // 6 + 1))
    joints = [VirtualSpring6(random_spd(rng, 6, 1e3, 1e4)) for _ in range(n6)]
    joints += [ActuatedJoint(_random_axis(rng), str(rng.choice(["revolute", "prismatic"])),
                             float(10 ** rng.uniform(3, 4)))
               for _ in range(n_theta - 6 * n6)]
    joints += [PassiveJoint(_random_axis(rng), str(rng.choice(["revolute", "prismatic"])))
               for _ in range(n_q)]
    order = rng.permutation(len(joints))
    elements = [_random_link(rng)]
    for i in order:
        elements += [joints[i], _random_link(rng)]
    return ChainModel(name, tuple(elements))


def _well_conditioned(chain: ChainModel, cond_max: float) -> bool:
    jp = jacobians(chain)
    s = np.linalg.svd(jp.J_theta, compute_uv=False)
    if len(s) < 6 or s[5] < s[0] / cond_max:
        return False
    if chain.n_q:
        sq = np.linalg.svd(np.hstack([jp.J_q]), compute_uv=False)
        if sq[-1] < sq[0] / cond_max:
            return False
    return True


def random_chain(rng: np.random.Generator, n_theta: int, n_q: int, *, name: str = "random",
                 cond_max: float = 1e3, max_tries: int = 1000) -> ChainModel:
    """Random chain with ``n_theta`` spring coordinates and ``n_q`` passive joints.

    Springs are a random mix of 6-DOF link springs (eigenvalues in
    [1e3, 1e4]) and 1-DOF actuators (stiffness in [1e3, 1e4]); passive joints
    have random axes and kinds. Draws are rejected until ``J_theta`` and
    ``J_q`` have condition numbers below ``cond_max``.
    """
    if n_theta < 6:
        raise ValueError("n_theta must be at least 6")
    if not 0 <= n_q <= 5:
        raise ValueError("n_q must be in 0..5")
    for _ in range(max_tries):
        chain = _draw(rng, n_theta, n_q, name)
        if _well_conditioned(chain, cond_max):
            return chain
    raise RuntimeError("could not draw a well-conditioned chain")
