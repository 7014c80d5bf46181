"""Command-line interface.

Exit codes: 0 success, 1 verification check failed, 2 input error,
3 numerical error, 4 analytic mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time

import numpy as np

from . import kernels
from .chain import JacobianPair, jacobians
from .errors import InputError, NumericalError, RedundantPassiveJoint
from .linalg import numerical_rank
from .parallel import aggregate
from .serial import (PIVOT_RTOL, StiffnessMatrix, base_stiffness, closed_form_stiffness,
                     dense_kkt_stiffness, recursive_reduce)

log = logging.getLogger("stiffkit")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3, 4
STEWART_TOL = 1e-8


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# formatting


def _rows(M) -> list:
    return [[float(x) for x in row] for row in np.asarray(M)]


def _text_matrix(M, indent="  ") -> str:
    return "\n".join(indent + " ".join(f"{x:>20.12g}" for x in row) for row in np.asarray(M))


def _stiffness_report(K: StiffnessMatrix) -> dict:
    return {
        "stiffness": _rows(K.K),
        "rank": K.rank,
        "positive_definite": K.is_positive_definite,
        "eigenvalues": [float(x) for x in K.eigenvalues],
        "kernel": _rows(K.null_space.T),
    }


def _emit(report: dict, fmt: str, text_fn) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        _csv_rows(w, report)
        sys.stdout.write(buf.getvalue())
    else:
        print(text_fn(report))


def _csv_rows(w, report, prefix=""):
    for key, val in report.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            _csv_rows(w, val, name + ".")
        elif isinstance(val, list) and val and isinstance(val[0], list):
            for i, row in enumerate(val):
                w.writerow([name, i] + [repr(x) if isinstance(x, float) else x for x in row])
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            for i, item in enumerate(val):
                _csv_rows(w, item, f"{name}[{i}].")
        elif isinstance(val, list):
            w.writerow([name, ""] + [repr(x) if isinstance(x, float) else x for x in val])
        else:
            w.writerow([name, "", repr(val) if isinstance(val, float) else val])


def _text_stiffness(r: dict, title: str) -> str:
    lines = [title, f"rank: {r['rank']}   positive-definite: {r['positive_definite']}",
             "eigenvalues: " + " ".join(f"{x:.12g}" for x in r["eigenvalues"]),
             "stiffness:", _text_matrix(r["stiffness"])]
    if r["kernel"]:
        lines += ["kernel basis (rows):", _text_matrix(r["kernel"])]
    return "\n".join(lines)


# --------------------------------------------------------------------------
# computation helpers


def _drop_redundant(chain, jp: JacobianPair, K0) -> JacobianPair:
    """Remove passive columns whose pivot vanishes, in order, with a warning."""
    keep = []
    K = np.ascontiguousarray(K0.K)
    for i in range(jp.J_q.shape[1]):
        out, mu, _ = kernels.active.rank1_update(K, np.ascontiguousarray(jp.J_q[:, i]),
                                                 PIVOT_RTOL * np.trace(K))
        if out is None:
            log.warning("chain %r: skipping redundant passive joint %s (pivot %.3e)",
                        chain.name, chain.passive_label(i), mu)
            continue
        K = out
        keep.append(i)
    return JacobianPair(jp.J_theta, jp.J_q[:, keep], jp.end_pose)


def _chain_stiffness(chain, method: str, skip_redundant: bool = False) -> StiffnessMatrix:
    jp = jacobians(chain)
    Kt = chain.spring_stiffness()
    if method == "auto":
        method = "closed" if numerical_rank(jp.J_theta) == 6 else "dense"
    try:
        if skip_redundant and numerical_rank(jp.J_theta) == 6:
            jp = _drop_redundant(chain, jp, base_stiffness(jp, Kt))
        if method == "dense":
            return dense_kkt_stiffness(jp, Kt)
        if method == "closed":
            return closed_form_stiffness(jp, Kt)[0]
        return recursive_reduce(base_stiffness(jp, Kt), jp.J_q, trace=False)[0]
    except RedundantPassiveJoint as exc:
        where = f"passive joint {chain.passive_label(exc.column)!r}" if exc.column is not None else "passive joints"
        raise RedundantPassiveJoint(f"chain {chain.name!r}: {where} redundant: {exc}", exc.column) from None
    except NumericalError as exc:
        raise type(exc)(f"chain {chain.name!r}: {exc}") from None


# --------------------------------------------------------------------------
# commands


def cmd_compute(args) -> int:
    from .io import load_model

    asm = load_model(args.model)
    t0 = time.perf_counter_ns()
    if args.chain:
        try:
            chain = asm.chain(args.chain)
        except KeyError:
            raise InputError(f"no chain named {args.chain!r}") from None
        K = _chain_stiffness(chain, args.method, args.skip_redundant)
        target = chain.name
        legs = None
    else:
        leg_K = [_chain_stiffness(leg.chain, args.method, args.skip_redundant) for leg in asm.legs]
        K = aggregate(asm, leg_K)
        target = "assembly"
        legs = [{"chain": leg.chain.name, "rank": k.rank} for leg, k in zip(asm.legs, leg_K)]
    elapsed = time.perf_counter_ns() - t0
    report = {"model": asm.name, "target": target, "method": args.method, "backend": kernels.BACKEND}
    report.update(_stiffness_report(K))
    if legs is not None:
        report["legs"] = legs
    report["timing_ns"] = elapsed

    def text(r):
        head = f"model {r['model']}  target {r['target']}  method {r['method']}"
        out = _text_stiffness(r, head)
        if "legs" in r:
            out += "\nleg ranks: " + ", ".join(f"{l['chain']}={l['rank']}" for l in r["legs"])
        return out

    _emit(report, args.format, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import verify_assembly, verify_chain

    if args.random:
        from .generate import random_chain

        rng = np.random.default_rng(args.seed)
        chain = random_chain(rng, args.n_theta, args.n_q, name=f"random_seed{args.seed}")
        checks = verify_chain(chain)
        K = _chain_stiffness(chain, "dense")
        name = chain.name
    elif args.model:
        from .io import load_model

        asm = load_model(args.model)
        checks, K = verify_assembly(asm)
        name = asm.name
    else:
        raise InputError("verify needs a model file or --random")
    ok = all(c.passed for c in checks)
    report = {"model": name, "passed": ok, "rank": K.rank, "checks": [c.as_dict() for c in checks]}

    def text(r):
        lines = [f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<48} {c['value']:.3e}  (tol {c['tolerance']:.1e})"
                 + (f"  {c['detail']}" if c["detail"] else "") for c in r["checks"]]
        lines.append(f"{r['model']}: stiffness rank {r['rank']}, "
                     f"{'all checks passed' if r['passed'] else 'CHECKS FAILED'}")
        return "\n".join(lines)

    _emit(report, args.format, text)
    return EXIT_OK if ok else EXIT_CHECK


def _entrywise_dev(A, B) -> float:
    scale = np.abs(B).max()
    return float(np.abs(A - B).max() / scale) if scale > 0 else float(np.abs(A).max())


def cmd_stewart(args) -> int:
    from .stewart import StewartParams, analytic_case_matrix, analytic_rank1_sum, build_case, leg_geometries
    from .parallel import assembly_stiffness

    params = StewartParams(args.R, args.r, args.h, args.k11, args.case, args.klink)
    asm = build_case(params)
    if args.save:
        from .io import save_model

        save_model(asm, args.save)
    K = assembly_stiffness(asm, args.method)
    keff = params.effective_K11
    ref = analytic_case_matrix(params, keff)
    raw = analytic_case_matrix(params)
    rank1 = analytic_rank1_sum(leg_geometries(params), keff)
    dev = _entrywise_dev(K.K, ref.K)
    report = {
        "case": params.case,
        "params": {"R": params.R, "r": params.r, "h": params.h, "K11": params.K11,
                   "k_link": params.link_stiffness, "L": params.leg_length, "K_eff": keff},
        "numerical": _stiffness_report(K),
        "analytic": _rows(ref.K),
        "deviation": dev,
        "deviation_rank1_sum": _entrywise_dev(K.K, rank1.K),
        "deviation_raw_K11": _entrywise_dev(K.K, raw.K),
        "tolerance": STEWART_TOL,
        "passed": dev <= STEWART_TOL,
    }

    def text(r):
        p = r["params"]
        head = (f"Stewart-Gough case {r['case']}: R={p['R']:g} r={p['r']:g} h={p['h']:g} "
                f"K11={p['K11']:g} k_link={p['k_link']:g} L={p['L']:.12g} K_eff={p['K_eff']:.12g}")
        return "\n".join([
            _text_stiffness(r["numerical"], head + "\nnumerical pipeline"),
            "analytic (K11 -> K_eff):", _text_matrix(r["analytic"]),
            f"max entrywise deviation / max entry: {r['deviation']:.3e} (tol {r['tolerance']:.0e})",
            f"  vs rank-1 leg sum: {r['deviation_rank1_sum']:.3e}   vs raw K11 matrix: {r['deviation_raw_K11']:.3e}",
        ])

    _emit(report, args.format, text)
    if dev > STEWART_TOL:
        log.error("numerical and analytic matrices disagree by %.3e > %.0e", dev, STEWART_TOL)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import bench_kernels, bench_methods

    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.kernels:
        w.writerow(["kernel", "backend", "ns_per_call"])
        for name, b, ns in bench_kernels(args.iterations, args.seed):
            w.writerow([name, b, f"{ns:.1f}"])
        return EXIT_OK
    if args.n_springs < 6 or not 0 <= args.n_passive <= 5 or args.trials < 1:
        raise InputError("need --n-springs >= 6, 0 <= --n-passive <= 5, --trials >= 1")
    rows = bench_methods(args.n_springs, args.n_passive, args.trials, args.seed, args.compare_backends)
    w.writerow(["method", "backend", "n_springs", "n_passive", "trials", "median_ns", "max_deviation", "valid"])
    for r in rows:
        w.writerow([r.method, r.backend, r.n_springs, r.n_passive, r.trials, r.median_ns,
                    repr(r.max_deviation), r.valid])
    return EXIT_OK if all(r.valid for r in rows) else EXIT_NUMERIC


# --------------------------------------------------------------------------


def _default_seed() -> int:
    try:
        return int(os.environ.get("STIFFKIT_SEED", "0"))
    except ValueError:
        return 0


def _positive(s: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not (np.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return x


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Fail(EXIT_INPUT, f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stiffkit", description="Cartesian stiffness of serial chains and parallel "
                "manipulators with passive joints.", epilog=__doc__.splitlines()[2] + " " + __doc__.splitlines()[3],
                allow_abbrev=False)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = dict(choices=["text", "json", "csv"], default="text")

    c = sub.add_parser("compute", help="stiffness of one chain or of the whole model", allow_abbrev=False)
    c.add_argument("model")
    c.add_argument("--chain", help="chain name; default is the aggregated assembly")
    c.add_argument("--method", choices=["dense", "closed", "recursive", "auto"], default="auto")
    c.add_argument("--format", **fmt)
    c.add_argument("--skip-redundant", action="store_true",
                   help="drop redundant passive joints with a warning instead of failing")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run the property checks on a model", allow_abbrev=False)
    v.add_argument("model", nargs="?")
    v.add_argument("--random", action="store_true", help="verify a seeded random chain instead")
    v.add_argument("--seed", type=int, default=_default_seed())
    v.add_argument("--n-theta", type=int, default=12)
    v.add_argument("--n-q", type=int, default=3)
    v.add_argument("--format", choices=["text", "json"], default="text")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stewart", help="Stewart-Gough case study (attachment angles in degrees: "
                                       "A = 0, 60, ..., 300; B = pairs at 0/120/240, platform +-60)",
                       allow_abbrev=False)
    s.add_argument("--case", choices=["A", "B"], required=True)
    s.add_argument("--R", type=_positive, required=True, help="base radius (m)")
    s.add_argument("--r", type=_positive, required=True, help="platform radius (m)")
    s.add_argument("--h", type=_positive, required=True, help="platform height (m)")
    s.add_argument("--k11", type=_positive, required=True, help="actuator stiffness (N/m)")
    s.add_argument("--klink", type=_positive, default=None, help="link spring stiffness (default 1e6*k11)")
    s.add_argument("--method", choices=["dense", "closed", "recursive", "auto"], default="auto")
    s.add_argument("--save", metavar="PATH", help="also write the model as JSON")
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_stewart)

    b = sub.add_parser("bench", help="time dense vs closed-form vs recursive (CSV)", allow_abbrev=False)
    b.add_argument("--n-springs", type=int, default=12)
    b.add_argument("--n-passive", type=int, default=3)
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--seed", type=int, default=_default_seed())
    b.add_argument("--compare-backends", action="store_true", help="add recursive rows for every kernel backend")
    b.add_argument("--kernels", action="store_true", help="micro-benchmark the 6x6 kernels per backend instead")
    b.add_argument("--iterations", type=int, default=20000)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        return args.func(args)
    except _Fail as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
