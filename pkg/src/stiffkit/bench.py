"""Timing of the dense, closed-form and recursive routes, and of the
compiled versus numpy kernels."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chain import jacobians
from .generate import random_chain, random_spd
from .linalg import rel_fro
from .serial import PIVOT_RTOL, base_stiffness, closed_form_stiffness, dense_kkt_stiffness, recursive_reduce

DEVIATION_LIMIT = 1e-9


@dataclass
class BenchRow:
    method: str
    backend: str
    n_springs: int
    n_passive: int
    trials: int
    median_ns: int
    max_deviation: float
    valid: bool


def _timed(fn):
    t0 = time.perf_counter_ns()
    out = fn()
    return out, time.perf_counter_ns() - t0


def bench_methods(n_springs: int, n_passive: int, trials: int, seed: int,
                  compare_backends: bool = False) -> list:
    """One row per method (plus one recursive row per extra backend).

    Deviations are relative Frobenius distances to the dense result and are
    deterministic for a given seed; timings are not.
    """
    rng = np.random.default_rng(seed)
    backends = [kernels.BACKEND]
    if compare_backends:
        backends += [b for b in kernels.available() if b != kernels.BACKEND]
    methods = [("dense", "numpy"), ("closed", "numpy")] + [("recursive", b) for b in backends]
    times = {m: [] for m in methods}
    devs = {m: 0.0 for m in methods}
    for _ in range(trials):
        chain = random_chain(rng, n_springs, n_passive)
        jp = jacobians(chain)
        Kt = chain.spring_stiffness()
        Kd, t = _timed(lambda: dense_kkt_stiffness(jp, Kt))
        times[("dense", "numpy")].append(t)
        (Kc, _), t = _timed(lambda: closed_form_stiffness(jp, Kt))
        times[("closed", "numpy")].append(t)
        devs[("closed", "numpy")] = max(devs[("closed", "numpy")], rel_fro(Kc.K, Kd.K))
        for b in backends:
            (Kr, _), t = _timed(lambda: recursive_reduce(base_stiffness(jp, Kt), jp.J_q,
                                                         trace=False, backend=b))
            times[("recursive", b)].append(t)
            devs[("recursive", b)] = max(devs[("recursive", b)], rel_fro(Kr.K, Kd.K))
    return [BenchRow(m, b, n_springs, n_passive, trials, int(np.median(times[(m, b)])),
                     devs[(m, b)], devs[(m, b)] <= DEVIATION_LIMIT)
            for m, b in methods]


def bench_kernels(iterations: int = 20000, seed: int = 0) -> list:
    """Per-call time of each 6x6 kernel on every available backend.

    Returns ``(kernel, backend, ns_per_call)`` tuples.
    """
    rng = np.random.default_rng(seed)
    K = np.ascontiguousarray(random_spd(rng, 6, 1.0, 10.0))
    col = rng.normal(size=6)
    Jq = np.asfortranarray(rng.normal(size=(6, 5)))
    v = rng.normal(size=3)
    tau = PIVOT_RTOL * np.trace(K)
    cases = {
        "rank1_update": lambda k: k.rank1_update(K, col, tau),
        "trivial_update": lambda k: k.trivial_update(K, 2, tau),
        "reduce_columns[5]": lambda k: k.reduce_columns(K, Jq, PIVOT_RTOL),
        "transport": lambda k: k.transport(K, v),
    }
    rows = []
    for name, fn in cases.items():
        for bname, mod in kernels.available().items():
            fn(mod)
            t0 = time.perf_counter_ns()
            for _ in range(iterations):
                fn(mod)
            rows.append((name, bname, (time.perf_counter_ns() - t0) / iterations))
    return rows
