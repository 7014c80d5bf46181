"""Property checks behind ``stiffkit verify``: Jacobian/FK consistency,
agreement of the dense, closed-form and recursive routes, rank and kernel
laws, symmetry/PSD, ordering invariance, and the soft-spring limit."""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .chain import ChainModel, finite_difference_jacobians, jacobians
from .linalg import numerical_rank, rel_fro
from .parallel import Assembly, aggregate
from .serial import (PSD_RTOL, base_stiffness, closed_form_stiffness, dense_kkt_stiffness,
                     passive_stiffness_scale, recursive_reduce, soft_spring_check)

EQUIV_TOL = 1e-9
FD_TOL = 1e-6
KERNEL_TOL = 1e-9
AGG_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _le(name, value, tol, detail=""):
    return Check(name, bool(value <= tol), float(value), float(tol), detail)


def _psd_checks(prefix, K) -> list:
    w = K.eig.values
    neg = max(0.0, -w.min()) / max(w.max(), np.finfo(float).tiny)
    return [_le(f"{prefix}.symmetry", K.asymmetry, PSD_RTOL),
            _le(f"{prefix}.psd", neg, PSD_RTOL, "max(-lambda_min, 0) / lambda_max")]


def _orderings(n):
    singles = [[(i,) for i in p] for p in itertools.permutations(range(n))]
    halves = []
    if n >= 2:
        a, b = tuple(range(n // 2)), tuple(range(n // 2, n))
        halves = [[a, b], [b, a], [tuple(range(n))]]
    return singles + halves


def verify_chain(chain: ChainModel) -> list:
    out = []
    p = chain.name
    jp = jacobians(chain)
    Kt = chain.spring_stiffness()
    Jt_fd, Jq_fd = finite_difference_jacobians(chain)
    fd = max(np.abs(Jt_fd - jp.J_theta).max(initial=0.0), np.abs(Jq_fd - jp.J_q).max(initial=0.0))
    out.append(_le(f"{p}.jacobian_fd", fd, FD_TOL, "max |J - central difference|"))

    Kd = dense_kkt_stiffness(jp, Kt)
    out += _psd_checks(f"{p}.dense", Kd)
    nq = chain.n_q
    normJ = max(np.linalg.norm(jp.J_q), 1.0)
    kern = np.linalg.norm(Kd.K @ jp.J_q) / (max(np.linalg.norm(Kd.K), 1e-300) * normJ) if nq else 0.0
    out.append(_le(f"{p}.dense.kernel_law", kern, KERNEL_TOL, "||K J_q|| / (||K|| ||J_q||)"))

    if numerical_rank(jp.J_theta) < 6:
        out.append(Check(f"{p}.closed_form", True, 0.0, 0.0, "skipped: rank(J_theta) < 6, dense route only"))
        return out

    Kc, _ = closed_form_stiffness(jp, Kt)
    K0 = base_stiffness(jp, Kt)
    Kr, tr = recursive_reduce(K0, jp.J_q)
    out.append(_le(f"{p}.equivalence.closed_vs_dense", rel_fro(Kc.K, Kd.K), EQUIV_TOL))
    out.append(_le(f"{p}.equivalence.recursive_vs_dense", rel_fro(Kr.K, Kd.K), EQUIV_TOL))
    out += _psd_checks(f"{p}.closed", Kc) + _psd_checks(f"{p}.recursive", Kr)
    out.append(Check(f"{p}.rank_law", Kc.rank == 6 - nq, float(Kc.rank), float(6 - nq),
                     "numerical rank vs 6 - n_q"))
    out.append(Check(f"{p}.rank_drop_per_step", all(d == 1 for d in tr.rank_drops),
                     float(max(tr.rank_drops, default=1)), 1.0, "rank drop of each singleton update"))
    if nq:
        kern = np.linalg.norm(Kc.K @ jp.J_q) / (max(np.linalg.norm(Kc.K), 1e-300) * normJ)
        out.append(_le(f"{p}.closed.kernel_law", kern, KERNEL_TOL, "||K J_q|| / (||K|| ||J_q||)"))
        worst = 0.0
        for part in _orderings(nq):
            Kp, _ = recursive_reduce(K0, jp.J_q, part, trace=False)
            worst = max(worst, rel_fro(Kp.K, Kc.K))
        out.append(_le(f"{p}.ordering_invariance", worst, EQUIV_TOL,
                       f"{len(_orderings(nq))} partitions/orderings"))
        s = passive_stiffness_scale(jp, Kt)
        rep = soft_spring_check(jp, Kt, [f * s for f in (1e-2, 1e-4, 1e-6)])
        ratio = min(rep.ratios)
        out.append(Check(f"{p}.soft_spring", rep.ok, float(ratio), 10.0,
                         f"error ratios {['%.3g' % r for r in rep.ratios]} per 100x eps step"))
    return out


def verify_assembly(asm: Assembly) -> tuple[list, object]:
    out = []
    legs = []
    for leg in asm.legs:
        out += verify_chain(leg.chain)
        jp = jacobians(leg.chain)
        Kt = leg.chain.spring_stiffness()
        legs.append(dense_kkt_stiffness(jp, Kt))
    if len(asm.legs) > 1 or np.any(asm.legs[0].v):
        K = aggregate(asm, legs)
        rev = Assembly(tuple(reversed(asm.legs)), asm.reference_pose)
        Kr = aggregate(rev, list(reversed(legs)))
        out += _psd_checks("assembly", K)
        out.append(_le("assembly.order_invariance", rel_fro(K.K, Kr.K), AGG_TOL))
    else:
        K = legs[0]
    return out, K
