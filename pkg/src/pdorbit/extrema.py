"""Certification of orbit extrema and explicit descent curves.

Two constructions move a non-minimal ``C`` strictly downhill while staying in
the orbit of ``B``:

* when ``A`` and ``C`` commute, a plane rotation swapping an adjacent pair
  of misordered common eigenvectors (:func:`commuting_descent_curve`);
* otherwise, a path ``l(t)`` of fixed determinant whose log-spectrum
  interpolates towards the aligned one (:func:`spectral_descent_path`),
  lifted numerically to a curve of unitaries (:func:`lift_path`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .majorization import SpectrumVector, anti_equality_gap, equality_gap
from .matcore import (
    MatrixError,
    as_matrix,
    commutant_dimension,
    commutator,
    eigh,
    spectral_map,
)
from .procrustes import OrbitPoint, ProcrustesInstance, objective, relative_matrix
from .uinorms import evaluate, is_strictly_convex, vector_norm


class PreconditionError(MatrixError):
    pass


class AlreadyExtremalError(PreconditionError):
    pass


def expm_skew(x, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """``exp(X)`` for anti-Hermitian ``X``, via the spectrum of ``-iX``."""
    h = -1j * np.asarray(x)
    s = eigh((h + h.conj().T) / 2, tols)
    u = s.basis
    return (u * np.exp(1j * s.eigenvalues)) @ u.conj().T


def _orbit_point(inst: ProcrustesInstance, c) -> OrbitPoint:
    if isinstance(c, OrbitPoint):
        return c
    return OrbitPoint.from_matrix(inst, c)


def is_commuting(inst: ProcrustesInstance, c) -> bool:
    c = c.C if isinstance(c, OrbitPoint) else as_matrix(c)
    scale = np.linalg.norm(inst.A) * np.linalg.norm(c)
    return bool(np.linalg.norm(commutator(inst.A, c)) <= inst.tols.comm_rel * scale)


def common_eigenbasis(inst: ProcrustesInstance, c) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal basis diagonalising both ``A`` and a commuting ``C``.

    Columns follow ``λ↓(A)``; inside an eigenspace of ``A`` they follow the
    eigenvalues of ``C`` in non-increasing order. Returns ``(Q, alpha, beta)``.
    """
    c = c.C if isinstance(c, OrbitPoint) else as_matrix(c)
    lam = inst.a_spec.eigenvalues
    u = np.array(inst.a_spec.basis)
    gap = inst.tols.orbit * lam[0]
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i - 1] - lam[i] > gap:
            if i - start > 1:
                block = u[:, start:i]
                inner = eigh(block.conj().T @ c @ block, inst.tols)
                u[:, start:i] = block @ inner.basis
            start = i
    alpha = np.real(np.einsum("ji,jk,ki->i", u.conj(), inst.A, u))
    beta = np.real(np.einsum("ji,jk,ki->i", u.conj(), c, u))
    return u, alpha, beta


@dataclass(frozen=True)
class DescentCurve:
    """Sampled curve ``t -> gamma(t) C gamma(t)*`` with ``gamma(0) = I``.

    ``values[j]`` is ``F_N`` at ``gamma(t_j) C gamma(t_j)*``. ``residuals`` is
    the lifting residual for lifted curves and the identity-check error for
    rotation curves.
    """

    kind: str
    t: np.ndarray
    gammas: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    converged: bool = True
    last_good_t: float | None = None
    C: np.ndarray | None = field(default=None, repr=False)
    plane: tuple[int, int] | None = None

    @property
    def t_range(self) -> tuple[float, float]:
        return float(self.t.min()), float(self.t.max())

    @property
    def value_at_zero(self) -> float:
        return float(self.values[np.argmin(np.abs(self.t))])

    @property
    def samples(self) -> list[tuple[float, np.ndarray, float]]:
        return [(float(t), g, float(v)) for t, g, v in zip(self.t, self.gammas, self.values)]

    def point(self, j: int) -> np.ndarray:
        g = self.gammas[j]
        m = g @ self.C @ g.conj().T
        return (m + m.conj().T) / 2

    def max_decrease(self) -> float:
        return float(self.value_at_zero - self.values.min())

    def descends(self, margin: float = 0.0) -> bool:
        """Every sample with ``t != 0`` lies below the value at ``t = 0`` by more than ``margin``."""
        mask = self.t != 0
        return bool(np.all(self.values[mask] < self.value_at_zero - margin))

    def descends_at_ends(self, margin: float = 0.0) -> bool:
        ends = [np.argmin(self.t), np.argmax(self.t)]
        return all(
            self.values[j] < self.value_at_zero - margin for j in ends if self.t[j] != 0
        )


def _rotation_samples(t_samples: int) -> np.ndarray:
    # open interval (-pi/2, pi/2); odd count keeps t = 0 on the grid
    n = t_samples if t_samples % 2 else t_samples + 1
    return np.linspace(-math.pi / 2, math.pi / 2, n + 2)[1:-1]


def find_ascending_pair(alpha, beta, tols: Tolerances = DEFAULT_TOLERANCES) -> int | None:
    """First ``i`` with ``alpha_i > alpha_{i+1}`` and ``beta_i < beta_{i+1}``."""
    a_gap = tols.orbit * max(abs(alpha[0]), 1e-300)
    b_gap = tols.orbit * max(np.max(np.abs(beta)), 1e-300)
    for i in range(len(alpha) - 1):
        if alpha[i] - alpha[i + 1] > a_gap and beta[i + 1] - beta[i] > b_gap:
            return i
    return None


def rotation_block_identities(alpha1, alpha2, beta1, beta2, t) -> tuple[np.ndarray, float]:
    """Closed-form trace (per ``t``) and determinant of the rotated 2x2 block."""
    t = np.asarray(t, dtype=float)
    trace = beta1 / alpha1 + beta2 / alpha2 + np.sin(t) ** 2 * (beta1 - beta2) * (1 / alpha2 - 1 / alpha1)
    det = beta1 * beta2 / (alpha1 * alpha2)
    return trace, det


def commuting_descent_curve(inst: ProcrustesInstance, c, t_samples: int = 41) -> DescentCurve:
    """Plane-rotation descent for ``C`` commuting with ``A``.

    In the common eigenbasis a pair ``i, i+1`` with ``α_i > α_{i+1}`` but
    ``β_i < β_{i+1}`` is rotated by ``W(t)``; the trace of the 2x2 block of
    ``A^{-1} C(t)`` drops by ``sin²t (β_{i+1}-β_i)(1/α_{i+1}-1/α_i)`` while its
    determinant is fixed, so its log-spectrum contracts.
    """
    point = _orbit_point(inst, c)
    if not is_commuting(inst, point):
        raise PreconditionError("A and C do not commute; use the spectral path construction")
    q, alpha, beta = common_eigenbasis(inst, point)
    i = find_ascending_pair(alpha, beta, inst.tols)
    if i is None:
        raise AlreadyExtremalError("no ascending adjacent pair: C is aligned with A")
    d = inst.d
    ts = _rotation_samples(t_samples)
    a_inv = spectral_map(inst.a_spec, "inv")
    trace_ref, det_ref = rotation_block_identities(alpha[i], alpha[i + 1], beta[i], beta[i + 1], ts)
    gammas = np.empty((len(ts), d, d), dtype=complex)
    values = np.empty(len(ts))
    errs = np.empty(len(ts))
    for j, t in enumerate(ts):
        w = np.eye(d, dtype=complex)
        ct, st = math.cos(t), math.sin(t)
        w[i, i] = w[i + 1, i + 1] = ct
        w[i, i + 1] = st
        w[i + 1, i] = -st
        g = q @ w @ q.conj().T
        ct_mat = g @ point.C @ g.conj().T
        ct_mat = (ct_mat + ct_mat.conj().T) / 2
        gammas[j] = g
        values[j] = objective(inst, ct_mat)
        block = (q.conj().T @ a_inv @ ct_mat @ q)[i : i + 2, i : i + 2]
        errs[j] = max(
            abs(np.trace(block) - trace_ref[j]),
            abs(np.linalg.det(block) - det_ref),
        )
    return DescentCurve(
        kind="commuting_rotation",
        t=ts,
        gammas=gammas,
        values=values,
        residuals=errs,
        C=np.array(point.C),
        plane=(i, i + 1),
    )


@dataclass(frozen=True)
class SpectralPath:
    """``l(t) = U exp(D_{ρ(t)}) U*`` with ``ρ(t) = |t| a + (1 - |t|) b``.

    ``b`` is the log-spectrum of ``A^{-1/2} C A^{-1/2}``, ``a`` the aligned
    log-spectrum ``(log λ(C) - log λ(A))↓``; every ``l(t)`` has determinant
    ``tau = det C / det A``.
    """

    a: SpectrumVector
    b: SpectrumVector
    tau: float
    aligner: np.ndarray
    t: np.ndarray
    l: np.ndarray
    C: np.ndarray = field(repr=False)

    def rho(self, t: float) -> np.ndarray:
        s = abs(t)
        return s * self.a.values + (1 - s) * self.b.values

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.t.tolist(), self.l))

    def log_spectra(self, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
        return np.array([np.log(eigh(m, tols).eigenvalues) for m in self.l])

    def determinants(self) -> np.ndarray:
        return np.real(np.linalg.det(self.l))

    def values(self, norm, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
        """``N(log l(t))`` at every sample."""
        return np.array([evaluate(norm, spectral_map(eigh(m, tols), "log"), tols) for m in self.l])


def _path_t(t_samples: int, t_max: float, symmetric: bool) -> np.ndarray:
    if symmetric:
        t = np.linspace(-t_max, t_max, t_samples)
        if not np.any(t == 0):
            t = np.sort(np.append(t, 0.0))
        return t
    return np.linspace(0.0, t_max, t_samples)


def spectral_descent_path(
    inst: ProcrustesInstance,
    c,
    t_samples: int = 41,
    *,
    t_max: float = 1.0,
    symmetric: bool = True,
    tol: float | None = None,
) -> SpectralPath:
    """Fixed-determinant path from ``A^{-1/2} C A^{-1/2}`` towards the aligned spectrum."""
    point = _orbit_point(inst, c)
    tol = inst.tols.certify * inst.d if tol is None else tol
    gap = equality_gap(inst.A, point.C, inst.tols)
    if gap <= tol:
        raise AlreadyExtremalError(f"C is already min-aligned (equality gap {gap:.3e})")
    m_spec = eigh(relative_matrix(inst, point), inst.tols)
    lam_c = eigh(point.C, inst.tols).eigenvalues
    lam_a = inst.a_spec.eigenvalues
    a = SpectrumVector.decreasing(np.log(lam_c) - np.log(lam_a))
    b = SpectrumVector(np.log(m_spec.eigenvalues), "non-increasing")
    tau = float(np.prod(lam_c) / np.prod(lam_a))
    ts = _path_t(t_samples, t_max, symmetric)
    u = m_spec.basis
    ls = np.empty((len(ts), inst.d, inst.d), dtype=complex)
    for j, t in enumerate(ts):
        rho = abs(t) * a.values + (1 - abs(t)) * b.values
        m = (u * np.exp(rho)) @ u.conj().T
        ls[j] = (m + m.conj().T) / 2
    return SpectralPath(a=a, b=b, tau=tau, aligner=np.array(u), t=ts, l=ls, C=np.array(point.C))


def _skew_basis(d: int) -> list[np.ndarray]:
    basis = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1j
        basis.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = 1.0, -1.0
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1j
            basis.append(e)
    return basis


def _herm_to_real(h: np.ndarray) -> np.ndarray:
    # Euclidean norm of the result equals the Frobenius norm of h
    iu = np.triu_indices(h.shape[0], 1)
    return np.concatenate(
        [np.real(np.diag(h)), math.sqrt(2) * h[iu].real, math.sqrt(2) * h[iu].imag]
    )


def gamma_map(inst: ProcrustesInstance, c, u, v) -> np.ndarray:
    """``Γ(U, V) = U A^{-1/2} U* V C V* U A^{-1/2} U*``."""
    p = u @ inst.a_inv_sqrt @ u.conj().T
    q = v @ np.asarray(c) @ v.conj().T
    m = p @ q @ p
    return (m + m.conj().T) / 2


def _gauss_newton(inst, c, target, u, v, basis, step, max_iter, tol_abs):
    a_is = inst.a_inv_sqrt
    n = len(basis)
    res = gamma_map(inst, c, u, v) - target
    rnorm = np.linalg.norm(res)
    for _ in range(max_iter):
        if rnorm <= tol_abs:
            break
        p = u @ a_is @ u.conj().T
        q = v @ c @ v.conj().T
        pq = p @ q
        qp = q @ p
        cols = []
        for e in basis:
            dp = u @ (e @ a_is - a_is @ e) @ u.conj().T
            cols.append(_herm_to_real(dp @ qp + pq @ dp))
        for e in basis:
            dq = v @ (e @ c - c @ e) @ v.conj().T
            cols.append(_herm_to_real(p @ dq @ p))
        jac = np.column_stack(cols)
        delta = np.linalg.lstsq(jac, -_herm_to_real(res), rcond=1e-10)[0]
        x1 = sum(w * e for w, e in zip(delta[:n], basis))
        x2 = sum(w * e for w, e in zip(delta[n:], basis))
        s = step
        for _ in range(30):
            u_new = u @ expm_skew(s * x1, inst.tols)
            v_new = v @ expm_skew(s * x2, inst.tols)
            res_new = gamma_map(inst, c, u_new, v_new) - target
            new_norm = np.linalg.norm(res_new)
            if new_norm < rnorm:
                break
            s /= 2
        else:
            break
        u, v, res, rnorm = u_new, v_new, res_new, new_norm
    return u, v, float(rnorm)


def lift_path(
    inst: ProcrustesInstance,
    path: SpectralPath,
    step: float = 1.0,
    *,
    residual_tol: float = 1e-6,
    max_iter: int = 50,
) -> DescentCurve:
    """Follow ``l(t)`` through ``Γ`` by warm-started Gauss-Newton on ``U(d) x U(d)``.

    At each sample the pair ``(U, V)`` from the neighbouring sample nearer to
    ``t = 0`` is corrected by tangent steps ``U exp(s X1)``, ``V exp(s X2)``
    (``X1``, ``X2`` anti-Hermitian, ``s`` starting at ``step`` and halved until
    the residual drops). The returned curve is ``γ(t) = U(t)* V(t)``. If a
    sample cannot be matched to ``residual_tol`` the curve is truncated there
    and flagged ``converged=False``.
    """
    c = np.asarray(path.C)
    if commutant_dimension(inst.A, c, inst.tols) != 1:
        raise PreconditionError(
            "commutant of {A, C} is non-trivial: Γ is not a submersion at (I, I)"
        )
    d = inst.d
    basis = _skew_basis(d)
    scale = np.linalg.norm(path.l[0])
    tol_abs = 1e-13 * max(scale, 1.0)
    order = np.argsort(np.abs(path.t), kind="stable")
    zero = order[0]
    solved: dict[int, tuple[np.ndarray, np.ndarray, float]] = {}
    u0 = np.eye(d, dtype=complex)
    solved[zero] = (u0, u0, float(np.linalg.norm(gamma_map(inst, c, u0, u0) - path.l[zero])))
    failed_beyond: dict[int, float] = {}
    last_good = {1: float(path.t[zero]), -1: float(path.t[zero])}
    for direction in (1, -1):
        idx = [j for j in order if j != zero and np.sign(path.t[j]) == direction]
        u, v = u0, u0
        for j in idx:
            u, v, r = _gauss_newton(inst, c, path.l[j], u, v, basis, step, max_iter, tol_abs)
            if r > residual_tol:
                failed_beyond[direction] = float(path.t[j])
                break
            solved[j] = (u, v, r)
            last_good[direction] = float(path.t[j])
    keep = sorted(solved, key=lambda j: path.t[j])
    ts = path.t[keep]
    gammas = np.empty((len(keep), d, d), dtype=complex)
    values = np.empty(len(keep))
    residuals = np.empty(len(keep))
    for n_, j in enumerate(keep):
        u, v, r = solved[j]
        g = u.conj().T @ v
        gammas[n_] = g
        ct = g @ c @ g.conj().T
        values[n_] = objective(inst, (ct + ct.conj().T) / 2)
        residuals[n_] = r
    converged = not failed_beyond
    last = None
    if not converged:
        last = max((last_good[k] for k in failed_beyond), key=abs)
    return DescentCurve(
        kind="spectral_path_lifted",
        t=ts,
        gammas=gammas,
        values=values,
        residuals=residuals,
        converged=converged,
        last_good_t=last,
        C=c,
    )


@dataclass(frozen=True)
class ProbeReport:
    min_delta: float
    best_direction: np.ndarray
    best_epsilon: float
    decreased: bool


def random_skew(d: int, rng: np.random.Generator) -> np.ndarray:
    """Anti-Hermitian matrix with Gaussian entries and unit Frobenius norm."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    x = (g - g.conj().T) / 2
    return x / np.linalg.norm(x)


def local_probe(
    inst: ProcrustesInstance,
    c,
    epsilon: float = 1e-3,
    trials: int = 500,
    seed=0,
    probe_tol: float | None = None,
) -> ProbeReport:
    """Evaluate ``F_N(exp(εX) C exp(-εX))`` along random anti-Hermitian ``X``.

    Offsets ``±epsilon`` and ``±epsilon/2`` are tried per direction; trial
    ``k`` draws its direction from the stream ``(seed, k)``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    probe_tol = inst.tols.probe if probe_tol is None else probe_tol
    point = _orbit_point(inst, c)
    d = inst.d
    lam_b = inst.b_spec.eigenvalues
    if lam_b[0] - lam_b[-1] <= inst.tols.orbit * lam_b[0]:
        # scalar B: the orbit is a single point
        return ProbeReport(0.0, np.zeros((d, d), dtype=complex), 0.0, False)
    f0 = objective(inst, point)
    best = (math.inf, None, 0.0)
    for k in range(trials):
        x = random_skew(d, np.random.default_rng([_seed_int(seed), k]))
        h = -1j * x
        spec = eigh((h + h.conj().T) / 2, inst.tols)
        for eps in (epsilon, -epsilon, epsilon / 2, -epsilon / 2):
            g = (spec.basis * np.exp(1j * eps * spec.eigenvalues)) @ spec.basis.conj().T
            ct = g @ point.C @ g.conj().T
            delta = objective(inst, (ct + ct.conj().T) / 2) - f0
            if delta < best[0]:
                best = (delta, x, eps)
    delta, x, eps = best
    direction = -1j * x if x is not None else np.zeros((d, d), dtype=complex)
    return ProbeReport(float(delta), (direction + direction.conj().T) / 2, eps, bool(delta < -probe_tol))


def _seed_int(seed) -> int:
    if isinstance(seed, (tuple, list)):
        return int(np.random.SeedSequence(list(seed)).generate_state(1)[0])
    return int(seed)


def probe_descent_curve(
    inst: ProcrustesInstance, c, report: ProbeReport, t_samples: int = 41
) -> DescentCurve:
    """One-sided curve ``exp(t iH)``, ``t`` from 0 to the probe offset, along the best probe."""
    point = _orbit_point(inst, c)
    x = 1j * np.asarray(report.best_direction) * np.sign(report.best_epsilon)
    ts = np.linspace(0.0, abs(report.best_epsilon), t_samples)
    d = inst.d
    gammas = np.empty((len(ts), d, d), dtype=complex)
    values = np.empty(len(ts))
    for j, t in enumerate(ts):
        g = expm_skew(t * x, inst.tols)
        gammas[j] = g
        ct = g @ point.C @ g.conj().T
        values[j] = objective(inst, (ct + ct.conj().T) / 2)
    return DescentCurve(
        kind="probe_direction",
        t=ts,
        gammas=gammas,
        values=values,
        residuals=np.zeros(len(ts)),
        C=np.array(point.C),
    )


@dataclass(frozen=True)
class ExtremumCertificate:
    """Outcome of :func:`certify`.

    ``value_optimal_only`` is set for norms that are not strictly convex: a
    ``global_min`` verdict then certifies the optimal value, not that ``C`` is
    the only kind of local minimizer.
    """

    verdict: str
    gap_min: float
    gap_max: float
    value: float
    min_value: float
    max_value: float
    witness: np.ndarray | None
    descent: DescentCurve | None
    degenerate_spectrum: bool
    value_optimal_only: bool
    tol: float

    @property
    def extremal(self) -> bool:
        return self.verdict != "not_extremal"


def certify(
    inst: ProcrustesInstance,
    c,
    tol: float | None = None,
    *,
    t_samples: int = 41,
    lift_t_max: float = 0.2,
    probe_trials: int = 500,
    probe_epsilon: float = 1e-3,
    seed=0,
) -> ExtremumCertificate:
    """Classify ``C`` as the global minimizer, the global maximizer, or neither.

    The classification uses the equality gaps of both GNL bounds. For a
    non-extremal point a descent curve is attached: the exact rotation when
    ``[A, C] = 0``, otherwise the lifted spectral path when the commutant of
    ``{A, C}`` is trivial, otherwise the best random probe direction.
    """
    point = _orbit_point(inst, c)
    d = inst.d
    tol = inst.tols.certify * d if tol is None else tol
    gap_min = equality_gap(inst.A, point.C, inst.tols)
    gap_max = anti_equality_gap(inst.A, point.C, inst.tols)
    la = np.log(inst.a_spec.eigenvalues)
    lb = np.log(inst.b_spec.eigenvalues)
    common = dict(
        gap_min=gap_min,
        gap_max=gap_max,
        value=objective(inst, point),
        min_value=vector_norm(inst.norm, lb - la),
        max_value=vector_norm(inst.norm, lb[::-1] - la),
        degenerate_spectrum=inst.degenerate_spectrum,
        value_optimal_only=not is_strictly_convex(inst.norm),
        tol=tol,
    )
    if gap_min <= tol or gap_max <= tol:
        verdict = "global_min" if gap_min <= tol else "global_max"
        witness = None
        if is_commuting(inst, point):
            witness = common_eigenbasis(inst, point)[0].conj().T
        return ExtremumCertificate(verdict=verdict, witness=witness, descent=None, **common)

    descent = None
    if is_commuting(inst, point):
        try:
            descent = commuting_descent_curve(inst, point, t_samples)
        except AlreadyExtremalError:
            descent = None
    if descent is None and commutant_dimension(inst.A, point.C, inst.tols) == 1:
        path = spectral_descent_path(inst, point, t_samples, t_max=lift_t_max, tol=0.0)
        curve = lift_path(inst, path)
        if curve.converged and curve.descends():
            descent = curve
    if descent is None:
        report = local_probe(inst, point, probe_epsilon, probe_trials, seed)
        if report.decreased:
            descent = probe_descent_curve(inst, point, report, t_samples)
    return ExtremumCertificate(verdict="not_extremal", witness=None, descent=descent, **common)
