"""``pdorbit`` command line.

Exit codes: 0 success / extremal, 1 gnl violation or suite failure,
2 parse or usage error, 3 matrix not Hermitian positive definite,
4 C not in the orbit of B, 10 certified not extremal.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .config import ConfigError, RunConfig
from .extrema import (
    AlreadyExtremalError,
    PreconditionError,
    certify,
    commuting_descent_curve,
    is_commuting,
    lift_path,
    local_probe,
    probe_descent_curve,
    spectral_descent_path,
)
from .majorization import gnl_verify
from .matcore import (
    DimensionError,
    NotHermitianError,
    NotPositiveDefiniteError,
    haar_unitary,
    random_pd,
)
from .matrixio import (
    MatrixFileError,
    certificate_to_dict,
    curve_csv,
    dumps_report,
    read_matrix,
    write_matrix,
)
from .oracle import DimensionGuardError, brute_force
from .procrustes import (
    OrbitMembershipError,
    OrbitPoint,
    ProcrustesInstance,
    distance_F2,
    distance_FN,
    global_maximizer,
    global_minimizer,
)
from .uinorms import NormSpec

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_NOT_PD = 3
EXIT_NOT_IN_ORBIT = 4
EXIT_NOT_EXTREMAL = 10


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _norm(text: str) -> NormSpec:
    try:
        return NormSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dims(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("..")
        out.extend(range(int(lo), int(hi) + 1) if hi else [int(lo)])
    return out


def _load(path: str) -> np.ndarray:
    try:
        return read_matrix(path)
    except MatrixFileError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _instance(a_path: str, b_path: str, norm: NormSpec | None, config: RunConfig) -> ProcrustesInstance:
    if norm is None:
        try:
            norm = NormSpec.parse(config.norm)
        except ValueError as exc:
            raise CliError(f"config norm: {exc}", EXIT_PARSE) from None
    a, b = _load(a_path), _load(b_path)
    if a.shape != b.shape:
        raise CliError(
            f"dimension mismatch: {a_path} is {a.shape[0]}x{a.shape[0]}, "
            f"{b_path} is {b.shape[0]}x{b.shape[0]}",
            EXIT_PARSE,
        )
    try:
        return ProcrustesInstance(a, b, norm, config.tolerances)
    except (NotHermitianError, NotPositiveDefiniteError) as exc:
        raise CliError(str(exc), EXIT_NOT_PD) from None
    except DimensionError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _orbit_point(inst: ProcrustesInstance, path: str) -> OrbitPoint:
    c = _load(path)
    try:
        return OrbitPoint.from_matrix(inst, c)
    except DimensionError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    except OrbitMembershipError as exc:
        raise CliError(str(exc), EXIT_NOT_IN_ORBIT) from None


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_dist(args, config: RunConfig) -> int:
    inst = _instance(args.A, args.C, args.norm, config)
    c = inst.B
    # C is trivially in its own orbit, so it plays the role of B
    print(f"F_N[{inst.norm.label}] = {distance_FN(inst, c):.12g}")
    print(f"F_2 = {distance_F2(inst, c):.12g}")
    return EXIT_OK


def cmd_solve(args, config: RunConfig) -> int:
    inst = _instance(args.A, args.B, args.norm, config)
    res = global_minimizer(inst) if args.mode == "min" else global_maximizer(inst)
    if args.out:
        write_matrix(args.out, res.C)
    report = {
        "mode": res.mode,
        "norm": inst.norm.label,
        "value": res.value,
        "degenerate_spectrum": res.degenerate_spectrum,
    }
    if not args.out:
        report["C"] = res.C
    _emit(dumps_report(report), args.report)
    return EXIT_OK


def cmd_certify(args, config: RunConfig) -> int:
    inst = _instance(args.A, args.B, args.norm, config)
    point = _orbit_point(inst, args.C)
    cert = certify(inst, point, args.tol, seed=config.seed)
    _emit(dumps_report(certificate_to_dict(cert)), args.report)
    if cert.descent is not None and args.curve:
        Path(args.curve).write_text(curve_csv(cert.descent))
    return EXIT_OK if cert.extremal else EXIT_NOT_EXTREMAL


def cmd_descend(args, config: RunConfig) -> int:
    inst = _instance(args.A, args.B, args.norm, config)
    point = _orbit_point(inst, args.C)
    method = args.method
    if method == "auto":
        method = "rotation" if is_commuting(inst, point) else "lifted"
    try:
        if method == "rotation":
            curve = commuting_descent_curve(inst, point, args.t_samples)
        elif method == "lifted":
            path = spectral_descent_path(
                inst, point, args.t_samples, t_max=args.t_max, symmetric=not args.one_sided
            )
            curve = lift_path(inst, path, args.step)
        else:
            rep = local_probe(inst, point, args.t_max, args.trials, config.seed)
            if not rep.decreased:
                print("probe found no descent direction", file=sys.stderr)
                return EXIT_OK
            curve = probe_descent_curve(inst, point, rep, args.t_samples)
    except AlreadyExtremalError as exc:
        print(f"no descent: {exc}", file=sys.stderr)
        return EXIT_OK
    except PreconditionError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    _emit(curve_csv(curve), args.out)
    if not curve.converged:
        print(f"lift stopped early; last good t = {curve.last_good_t}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_gnl(args, config: RunConfig) -> int:
    seed = config.seed if args.seed is None else args.seed
    dims = args.dims if args.dims is not None else list(config.dims)
    trials = config.trials if args.trials is None else args.trials
    rows = []
    for d in dims:
        for k in range(trials):
            rng = np.random.default_rng([seed, d, k, 0])
            a = random_pd(d, [seed, d, k, 1], float(10 ** rng.uniform(0, 3)))
            b = random_pd(d, [seed, d, k, 2], float(10 ** rng.uniform(0, 3)))
            rows.append({"kind": "random", "d": d, "trial": k, **gnl_verify(a, b, args.tol).as_dict()})
        for k in range(args.aligned):
            rng = np.random.default_rng([seed, d, k, 3])
            v = np.array(haar_unitary(d, [seed, d, k, 4]))
            alpha = np.sort(np.exp(rng.uniform(-2, 2, d)))[::-1]
            beta = np.sort(np.exp(rng.uniform(-2, 2, d)))[::-1]
            a = (v * alpha) @ v.conj().T
            b = (v * beta) @ v.conj().T
            rows.append({"kind": "aligned", "d": d, "trial": k, **gnl_verify(a, b, args.tol).as_dict()})
    violations = sum((not r["left_holds"]) + (not r["right_holds"]) for r in rows)
    worst = max([max(r["left_violation"], r["right_violation"]) for r in rows], default=None)
    summary = {"trials": len(rows), "violations": violations, "max_violation": worst, "tol": args.tol}
    _emit(dumps_report({"summary": summary, "trials": rows}), args.report)
    print(
        f"gnl: {len(rows)} pairs, {violations} violations, max violation {worst}",
        file=sys.stderr,
    )
    return EXIT_OK if violations == 0 else EXIT_FAIL


def cmd_oracle(args, config: RunConfig) -> int:
    inst = _instance(args.A, args.B, args.norm, config)
    seed = config.seed if args.seed is None else args.seed
    try:
        value, point = brute_force(inst, args.mode, args.budget, seed, args.max_dim)
    except DimensionGuardError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    closed = global_minimizer(inst) if args.mode == "min" else global_maximizer(inst)
    report = {
        "mode": args.mode,
        "norm": inst.norm.label,
        "oracle_value": value,
        "closed_form_value": closed.value,
        "abs_difference": abs(value - closed.value),
        "C": point.C,
    }
    _emit(dumps_report(report), args.report)
    return EXIT_OK


def cmd_suite(args, config: RunConfig) -> int:
    if args.scale is not None:
        config = dataclasses.replace(config, scale=args.scale)

    def show(res):
        print(f"{res.line()} [{res.runtime:.1f}s]", file=sys.stderr, flush=True)

    try:
        results = acceptance.run_suite(config, on_result=show)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    if config.format == "csv":
        text = _suite_csv(results)
    else:
        text = dumps_report(acceptance.report_dict(results))
    _emit(text, args.report or config.output)
    passed = sum(r.passed for r in results)
    print(f"suite: {passed}/{len(results)} criteria passed", file=sys.stderr)
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def _suite_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "passed", "tolerance_induced", "measured"])
    for r in results:
        w.writerow([r.key, r.passed, r.tolerance_induced, json.dumps(r.measured, sort_keys=True)])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pdorbit", description="Procrustes problems on unitary orbits of positive definite matrices."
    )
    p.add_argument("--config", help="JSON config file (default: $PDORBIT_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True)

    def norm_flag(sp):
        sp.add_argument("--norm", type=_norm, default=None,
                        help="schatten:p, kyfan:k or spectral (default from config, schatten:2)")

    sp = sub.add_parser("dist", help="F_N and F_2 between A and C")
    sp.add_argument("A")
    sp.add_argument("C")
    norm_flag(sp)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("solve", help="closed-form minimizer or maximizer on the orbit of B")
    sp.add_argument("A")
    sp.add_argument("B")
    norm_flag(sp)
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.add_argument("--out", help="write the extremizer here as a matrix file")
    sp.add_argument("--report", help="write the JSON report here (default stdout)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("certify", help="classify C in the orbit of B")
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("C")
    norm_flag(sp)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--report")
    sp.add_argument("--curve", help="write the descent curve CSV here when not extremal")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("descend", help="sample a descent curve from C")
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("C")
    norm_flag(sp)
    sp.add_argument("--method", choices=("auto", "rotation", "lifted", "probe"), default="auto")
    sp.add_argument("--t-samples", type=int, default=41)
    sp.add_argument("--t-max", type=float, default=0.2, help="path range (lifted) or probe step")
    sp.add_argument("--one-sided", action="store_true")
    sp.add_argument("--step", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--out", help="CSV output (default stdout)")
    sp.set_defaults(func=cmd_descend)

    sp = sub.add_parser("gnl", help="Monte-Carlo sweep of the GNL chain")
    sp.add_argument("--dims", type=_dims, default=None, help="e.g. 2..6 or 2,3,5")
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--aligned", type=int, default=0, help="constructed aligned pairs per d")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_gnl)

    sp = sub.add_parser("oracle", help="brute-force extremum over the orbit of B")
    sp.add_argument("A")
    sp.add_argument("B")
    norm_flag(sp)
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.add_argument("--budget", type=int, default=20)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--max-dim", type=int, default=4)
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("suite", help="run the acceptance suite")
    sp.add_argument("--scale", type=float, default=None, help="multiply all trial counts")
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.load(args.config)
    except (ConfigError, OSError, TypeError) as exc:
        print(f"pdorbit: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, config)
    except CliError as exc:
        print(f"pdorbit: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
