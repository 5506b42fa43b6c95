"""Acceptance criteria, runnable from pytest and from ``pdorbit suite``.

Each criterion is a function ``(ctx) -> CriterionResult``. Every random draw
comes from a counter-based stream ``(seed, criterion, trial, ...)`` so a
report depends only on the configuration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import RunConfig
from .extrema import (
    certify,
    commuting_descent_curve,
    lift_path,
    local_probe,
    spectral_descent_path,
)
from .majorization import equality_gap, gnl_verify, majorizes
from .matcore import (
    commutant_dimension,
    eigh,
    haar_unitary,
    random_hermitian,
    random_pd,
)
from .matrixio import dumps_matrix, dumps_report, loads_matrix
from .oracle import brute_force
from .procrustes import (
    OrbitPoint,
    ProcrustesInstance,
    global_maximizer,
    global_minimizer,
    min_value,
)
from .uinorms import NormSpec, evaluate

SCHATTEN2 = NormSpec.schatten(2)


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    measured: dict
    thresholds: dict
    tolerance_induced: bool = False
    runtime: float = field(default=0.0, compare=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = " (tolerance-induced)" if self.tolerance_induced else ""
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.key}: {self.title}{extra} | {shown}"

    def as_dict(self) -> dict:
        return {
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "tolerance_induced": self.tolerance_induced,
            "measured": self.measured,
            "thresholds": self.thresholds,
        }


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


class Context:
    def __init__(self, config: RunConfig):
        self.config = config
        self.seed = config.seed

    def count(self, n: int) -> int:
        return max(1, int(round(n * self.config.scale))) if n else 0

    def tol(self, key: str, default: float) -> float:
        ct = self.config.criterion_tolerances
        return float(ct.get(key, ct.get("*", default)))

    def rng(self, *keys: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, *keys])

    def stream(self, *keys: int) -> list[int]:
        return [self.seed, *keys]


def _log_uniform_cond(rng, high: float = 1e3) -> float:
    return float(10 ** rng.uniform(0, math.log10(high)))


def random_pair(ctx: Context, d: int, *keys: int, cond_high: float = 1e3):
    rng = ctx.rng(*keys, 0)
    a = random_pd(d, ctx.stream(*keys, 1), _log_uniform_cond(rng, cond_high))
    b = random_pd(d, ctx.stream(*keys, 2), _log_uniform_cond(rng, cond_high))
    return a, b


def random_orbit_instance(ctx: Context, d: int, *keys: int, norm=SCHATTEN2, cond_high=1e2):
    a, b = random_pair(ctx, d, *keys, cond_high=cond_high)
    inst = ProcrustesInstance(a, b, norm)
    c = OrbitPoint.from_unitary(inst, haar_unitary(d, ctx.stream(*keys, 3)))
    return inst, c


def commuting_misordered_instance(ctx: Context, *keys: int):
    """``A``, ``C`` diagonal in a common random basis with ``C`` not min-aligned."""
    rng = ctx.rng(*keys, 0)
    d = int(rng.integers(2, 7))
    alpha = np.sort(np.exp(rng.uniform(-1, 1, d)))[::-1]
    beta = np.sort(np.exp(rng.uniform(-1, 1, d)))[::-1]
    while True:
        perm = rng.permutation(d)
        if np.any(np.diff(beta[perm]) > 0):
            break
    v = np.array(haar_unitary(d, ctx.stream(*keys, 1)))
    w = np.array(haar_unitary(d, ctx.stream(*keys, 2)))
    a = (v * alpha) @ v.conj().T
    c = (v * beta[perm]) @ v.conj().T
    b = (w * beta) @ w.conj().T
    inst = ProcrustesInstance((a + a.conj().T) / 2, (b + b.conj().T) / 2, SCHATTEN2)
    return inst, OrbitPoint.from_matrix(inst, c)


def c1_gnl_chain(ctx: Context) -> CriterionResult:
    tol = ctx.tol("gnl_chain", 1e-9)
    trials = ctx.count(1000)
    worst = -math.inf
    failures = 0
    for d in range(2, 7):
        for k in range(trials):
            a, b = random_pair(ctx, d, 1, d, k)
            rep = gnl_verify(a, b, tol)
            worst = max(worst, rep.left_violation, rep.right_violation)
            failures += (not rep.left_holds) + (not rep.right_holds)
    return CriterionResult(
        "gnl_chain",
        "GNL chain lower ≺ mid ≺ upper, d = 2..6",
        failures == 0,
        {"pairs": 5 * trials, "failures": failures, "max_violation": worst},
        {"partial_sum_tol": tol},
    )


def aligned_pair(ctx: Context, *keys: int):
    rng = ctx.rng(*keys, 0)
    d = int(rng.integers(2, 7))
    alpha = np.sort(np.exp(rng.uniform(-2, 2, d)))[::-1]
    beta = np.sort(np.exp(rng.uniform(-2, 2, d)))[::-1]
    v = np.array(haar_unitary(d, ctx.stream(*keys, 1)))
    a = (v * alpha) @ v.conj().T
    b = (v * beta) @ v.conj().T
    return (a + a.conj().T) / 2, (b + b.conj().T) / 2


def c2_equality(ctx: Context) -> CriterionResult:
    tol_eq = ctx.tol("equality_aligned", 1e-8)
    tol_ne = ctx.tol("equality_generic", 1e-4)
    n = ctx.count(200)
    worst_aligned = 0.0
    for k in range(n):
        a, b = aligned_pair(ctx, 2, 0, k)
        worst_aligned = max(worst_aligned, equality_gap(a, b))
    smallest_generic = math.inf
    drawn = 0
    k = 0
    while drawn < n:
        rng = ctx.rng(2, 1, k, 9)
        d = int(rng.integers(2, 7))
        a, b = random_pair(ctx, d, 2, 1, k)
        k += 1
        if commutant_dimension(a, b) != 1:
            continue
        drawn += 1
        smallest_generic = min(smallest_generic, equality_gap(a, b))
    passed = worst_aligned < tol_eq and smallest_generic > tol_ne
    return CriterionResult(
        "equality_case",
        "equality gap vanishes iff simultaneously ordered-diagonalisable",
        passed,
        {"aligned_max_gap": worst_aligned, "generic_min_gap": smallest_generic, "pairs": 2 * n},
        {"aligned_below": tol_eq, "generic_above": tol_ne},
    )


ORACLE_BUDGET = 6


def _oracle_instances(ctx: Context, key: int):
    for d, n in ((2, ctx.count(50)), (3, ctx.count(20))):
        for k in range(n):
            a, b = random_pair(ctx, d, key, d, k, cond_high=1e2)
            yield d, k, a, b


def c3_closed_form_vs_oracle(ctx: Context) -> CriterionResult:
    tol = ctx.tol("oracle_extremizers", 1e-4)
    worst = {"min": 0.0, "max": 0.0}
    count = 0
    for d, k, a, b in _oracle_instances(ctx, 3):
        for norm in (NormSpec.schatten(2), NormSpec.schatten(3)):
            inst = ProcrustesInstance(a, b, norm)
            for mode, closed in (("min", global_minimizer), ("max", global_maximizer)):
                val, _ = brute_force(inst, mode, ORACLE_BUDGET, ctx.stream(3, d, k))
                worst[mode] = max(worst[mode], abs(closed(inst).value - val))
                count += 1
    return CriterionResult(
        "oracle_extremizers",
        "closed-form min/max vs brute force, schatten 2 and 3",
        max(worst.values()) < tol,
        {"comparisons": count, "max_err_min": worst["min"], "max_err_max": worst["max"]},
        {"abs_tol": tol},
    )


def c4_spectral_min_value(ctx: Context) -> CriterionResult:
    tol = ctx.tol("spectral_min_value", 1e-4)
    worst = 0.0
    count = 0
    for d, k, a, b in _oracle_instances(ctx, 3):
        inst = ProcrustesInstance(a, b, NormSpec.spectral())
        val, _ = brute_force(inst, "min", ORACLE_BUDGET, ctx.stream(4, d, k))
        worst = max(worst, abs(min_value(inst) - val))
        count += 1
    return CriterionResult(
        "spectral_min_value",
        "minimum value formula under the spectral norm vs brute force",
        worst < tol,
        {"comparisons": count, "max_err": worst},
        {"abs_tol": tol},
    )


def c5_rotation_identities(ctx: Context) -> CriterionResult:
    tol = ctx.tol("rotation_identities", 1e-12)
    n = ctx.count(100)
    worst_identity = 0.0
    not_decreasing = 0
    min_drop = math.inf
    for k in range(n):
        inst, c = commuting_misordered_instance(ctx, 5, k)
        curve = commuting_descent_curve(inst, c, 41)
        worst_identity = max(worst_identity, float(curve.residuals.max()))
        if not curve.descends():
            not_decreasing += 1
        mask = curve.t != 0
        min_drop = min(min_drop, float(curve.value_at_zero - curve.values[mask].max()))
    return CriterionResult(
        "rotation_identities",
        "plane-rotation trace/det identities and strict descent (commuting case)",
        worst_identity <= tol and not_decreasing == 0,
        {
            "instances": n,
            "max_identity_err": worst_identity,
            "non_descending_curves": not_decreasing,
            "smallest_drop": min_drop,
        },
        {"identity_tol": tol},
    )


def c6_spectral_path(ctx: Context) -> CriterionResult:
    det_tol = ctx.tol("path_det", 1e-8)
    maj_tol = ctx.tol("path_majorization", 1e-9)
    end_tol = ctx.tol("path_endpoint", 1e-9)
    n = ctx.count(100)
    worst_det = worst_end = 0.0
    maj_fail = not_decreasing = 0
    for k in range(n):
        rng = ctx.rng(6, k, 9)
        d = int(rng.integers(2, 7))
        inst, c = random_orbit_instance(ctx, d, 6, k)
        path = spectral_descent_path(inst, c, 41)
        dets = path.determinants()
        worst_det = max(worst_det, float(np.max(np.abs(dets / path.tau - 1))))
        logs = path.log_spectra(inst.tols)
        zero = int(np.argmin(np.abs(path.t)))
        maj_fail += sum(not majorizes(row, logs[zero], maj_tol) for row in logs)
        vals = path.values(inst.norm, inst.tols)
        ends = np.abs(np.abs(path.t) - 1) == 0
        worst_end = max(worst_end, float(np.max(np.abs(vals[ends] - min_value(inst)))))
        if not np.all(vals[path.t != 0] < vals[zero]):
            not_decreasing += 1
    return CriterionResult(
        "spectral_path_laws",
        "fixed-determinant path: det, log-majorization, endpoint value, strict descent",
        worst_det <= det_tol and maj_fail == 0 and worst_end <= end_tol and not_decreasing == 0,
        {
            "paths": n,
            "max_rel_det_err": worst_det,
            "majorization_failures": maj_fail,
            "max_endpoint_err": worst_end,
            "non_descending_paths": not_decreasing,
        },
        {"det_rel_tol": det_tol, "majorization_tol": maj_tol, "endpoint_tol": end_tol},
    )


def c7_lifting(ctx: Context) -> CriterionResult:
    tol = ctx.tol("lifting", 1e-6)
    n = ctx.count(20)
    worst = 0.0
    failed = not_below = 0
    k = drawn = 0
    while drawn < n:
        d = 2 + (drawn % 2)
        inst, c = random_orbit_instance(ctx, d, 7, k)
        k += 1
        if commutant_dimension(inst.A, c.C) != 1:
            continue
        drawn += 1
        path = spectral_descent_path(inst, c, 21, t_max=0.2, symmetric=False)
        curve = lift_path(inst, path)
        if not curve.converged or len(curve.t) != len(path.t):
            failed += 1
            continue
        worst = max(worst, float(curve.residuals.max()))
        if not curve.values[-1] < curve.values[0]:
            not_below += 1
    return CriterionResult(
        "lifting",
        "path-following lift through Γ on t in [0, 0.2]",
        failed == 0 and worst < tol and not_below == 0,
        {"instances": n, "max_residual": worst, "failed_lifts": failed, "not_below_at_end": not_below},
        {"residual_tol": tol},
    )


def c8_local_probe(ctx: Context) -> CriterionResult:
    tol = ctx.tol("probe_no_decrease", 1e-8)
    need = ctx.tol("probe_decrease", 1e-6)
    n_min = ctx.count(10)
    trials = 500
    worst = math.inf
    uncertified = 0
    for k in range(n_min):
        d = 2 + (k % 3)
        inst, _ = random_orbit_instance(ctx, d, 8, k)
        cstar = global_minimizer(inst).point
        cert = certify(inst, cstar)
        if cert.verdict != "global_min":
            uncertified += 1
            continue
        for j, eps in enumerate((1e-2, 1e-3)):
            rep = local_probe(inst, cstar, eps, trials, ctx.stream(8, k, j))
            worst = min(worst, rep.min_delta)
    smallest_decrease = math.inf
    n5 = ctx.count(100)
    for k in range(n5):
        inst, c = commuting_misordered_instance(ctx, 5, k)
        curve = commuting_descent_curve(inst, c, 41)
        drop = curve.max_decrease()
        if drop < need:
            rep = local_probe(inst, c, 1e-3, trials, ctx.stream(8, 1000 + k))
            drop = max(drop, -rep.min_delta)
        smallest_decrease = min(smallest_decrease, drop)
    return CriterionResult(
        "local_probe",
        "no probe decrease at certified minimizers; decrease at non-extremal points",
        uncertified == 0 and worst >= -tol and smallest_decrease >= need,
        {
            "minimizers": n_min,
            "uncertified": uncertified,
            "most_negative_delta": worst,
            "non_extremal_points": n5,
            "smallest_decrease": smallest_decrease,
        },
        {"no_decrease_tol": tol, "required_decrease": need},
    )


def c9_infrastructure(ctx: Context) -> CriterionResult:
    rec_tol = ctx.tol("eigh_reconstruction", 1e-9)
    inv_tol = ctx.tol("norm_invariance", 1e-10)
    n = ctx.count(1000)
    worst_rec = 0.0
    for k in range(n):
        d = 1 + k % 10
        h = random_hermitian(d, ctx.stream(9, 0, k))
        s = eigh(h)
        worst_rec = max(worst_rec, float(np.linalg.norm(s.reconstruct() - h) / np.linalg.norm(h)))
    norms = [
        NormSpec.schatten(1),
        NormSpec.schatten(1.5),
        NormSpec.schatten(2),
        NormSpec.schatten(3),
        NormSpec.spectral(),
        NormSpec.kyfan(1),
        NormSpec.kyfan(2),
    ]
    worst_inv = 0.0
    for k in range(ctx.count(50)):
        d = 2 + k % 5
        rng = ctx.rng(9, 1, k)
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        u = haar_unitary(d, ctx.stream(9, 2, k))
        v = haar_unitary(d, ctx.stream(9, 3, k))
        h = (m + m.conj().T) / 2
        for norm in norms:
            worst_inv = max(worst_inv, abs(evaluate(norm, u @ m @ v) - evaluate(norm, m)))
            worst_inv = max(worst_inv, abs(evaluate(norm, u @ h @ u.conj().T) - evaluate(norm, h)))
    roundtrip_ok = True
    for k in range(ctx.count(100)):
        d = 1 + k % 6
        m = random_hermitian(d, ctx.stream(9, 4, k)) * 10.0 ** ctx.rng(9, 5, k).uniform(-8, 8)
        back = loads_matrix(dumps_matrix(m))
        roundtrip_ok &= bool(np.array_equal(back.view(np.float64), np.asarray(m).view(np.float64)))
    deterministic = _determinism_check(ctx)
    return CriterionResult(
        "infrastructure",
        "eigh reconstruction, norm unitary invariance, file round trip, suite determinism",
        worst_rec < rec_tol and worst_inv <= inv_tol and roundtrip_ok and deterministic,
        {
            "max_reconstruction_rel": worst_rec,
            "max_invariance_err": worst_inv,
            "roundtrip_bit_exact": roundtrip_ok,
            "suite_deterministic": deterministic,
        },
        {"reconstruction_rel_tol": rec_tol, "invariance_tol": inv_tol},
    )


def _determinism_check(ctx: Context) -> bool:
    small = RunConfig(seed=ctx.seed, scale=min(ctx.config.scale, 0.02))
    skip = {"infrastructure", "oracle_extremizers", "spectral_min_value"}
    crits = [c for c in CRITERIA if c[0] not in skip]
    first = dumps_report(report_dict(run_suite(small, crits)))
    second = dumps_report(report_dict(run_suite(small, crits)))
    return first == second


DEFAULT_THRESHOLDS = {
    "gnl_chain": 1e-9,
    "equality_aligned": 1e-8,
    "equality_generic": 1e-4,
    "oracle_extremizers": 1e-4,
    "spectral_min_value": 1e-4,
    "rotation_identities": 1e-12,
    "path_det": 1e-8,
    "path_majorization": 1e-9,
    "path_endpoint": 1e-9,
    "lifting": 1e-6,
    "probe_no_decrease": 1e-8,
    "probe_decrease": 1e-6,
    "eigh_reconstruction": 1e-9,
    "norm_invariance": 1e-10,
}

CRITERIA: list[tuple[str, Callable[[Context], CriterionResult]]] = [
    ("gnl_chain", c1_gnl_chain),
    ("equality_case", c2_equality),
    ("oracle_extremizers", c3_closed_form_vs_oracle),
    ("spectral_min_value", c4_spectral_min_value),
    ("rotation_identities", c5_rotation_identities),
    ("spectral_path_laws", c6_spectral_path),
    ("lifting", c7_lifting),
    ("local_probe", c8_local_probe),
    ("infrastructure", c9_infrastructure),
]


def _tightened(config: RunConfig) -> bool:
    ct = config.criterion_tolerances
    for key, value in ct.items():
        if key == "*":
            if any(value < v for v in DEFAULT_THRESHOLDS.values()):
                return True
        elif key in DEFAULT_THRESHOLDS and value < DEFAULT_THRESHOLDS[key]:
            return True
    return False


def run_criterion(config: RunConfig, key: str) -> CriterionResult:
    func = dict(CRITERIA)[key]
    return _run_one(Context(config), func)


def _run_one(ctx: Context, func) -> CriterionResult:
    start = time.perf_counter()
    res = func(ctx)
    res.runtime = time.perf_counter() - start
    if not res.passed and _tightened(ctx.config):
        res.tolerance_induced = True
    return res


def run_suite(config: RunConfig, criteria=None, on_result=None) -> list[CriterionResult]:
    """Run every criterion, collecting failures instead of stopping at the first."""
    ctx = Context(config)
    if criteria is None:
        criteria = CRITERIA
        if config.criteria is not None:
            unknown = set(config.criteria) - {k for k, _ in CRITERIA}
            if unknown:
                raise ValueError(f"unknown criteria: {sorted(unknown)}")
            criteria = [c for c in CRITERIA if c[0] in config.criteria]
    results = []
    for _, func in criteria:
        res = _run_one(ctx, func)
        results.append(res)
        if on_result is not None:
            on_result(res)
    return results


def report_dict(results: list[CriterionResult]) -> dict:
    return {
        "all_passed": all(r.passed for r in results),
        "criteria": [r.as_dict() for r in results],
    }
