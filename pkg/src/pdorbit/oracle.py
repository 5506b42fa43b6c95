"""Brute-force optimisation of F_N over the unitary orbit.

This is the independent check on the closed-form extremizers, so it shares
no numerical path with them: spectra come from LAPACK (``numpy.linalg``),
the 2x2 case uses the explicit eigenvalue formula, and it never looks at the
eigenbasis of ``A``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.optimize

from .extrema import random_skew
from .matcore import MatrixError, haar_unitary
from .procrustes import OrbitPoint, ProcrustesInstance
from .uinorms import NormSpec


class DimensionGuardError(MatrixError):
    pass


GRID_POINTS = 120
REFINE_PASSES = 2
REFINE_FACTOR = 10


def batched_gauge(norm: NormSpec, x: np.ndarray) -> np.ndarray:
    """Symmetric gauge of each row of ``x``."""
    a = np.abs(x)
    if norm.kind == "spectral":
        return a.max(axis=-1)
    if norm.kind == "kyfan":
        return -np.sort(-a, axis=-1)[..., : norm.k].sum(axis=-1)
    top = a.max(axis=-1, keepdims=True)
    top = np.where(top == 0, 1.0, top)
    return top[..., 0] * np.sum((a / top) ** norm.p, axis=-1) ** (1.0 / norm.p)


def _inv_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v / np.sqrt(w)) @ v.conj().T


def _su2(theta, phi, psi):
    c, s = np.cos(theta), np.sin(theta)
    e_phi, e_psi = np.exp(1j * phi), np.exp(1j * psi)
    return c * e_phi, s * e_psi, -s / e_psi, c / e_phi


class _TwoByTwo:
    """Vectorised objective on the SU(2) parametrisation ``U(θ, φ, ψ)``."""

    def __init__(self, inst: ProcrustesInstance, sign: float):
        self.norm = inst.norm
        self.sign = sign
        self.b = np.array(inst.B)
        self.r = _inv_sqrt(np.array(inst.A))

    def conjugated(self, theta, phi, psi):
        u11, u12, u21, u22 = _su2(theta, phi, psi)
        b = self.b
        # C = U* B U entrywise
        bu11 = b[0, 0] * u11 + b[0, 1] * u21
        bu12 = b[0, 0] * u12 + b[0, 1] * u22
        bu21 = b[1, 0] * u11 + b[1, 1] * u21
        bu22 = b[1, 0] * u12 + b[1, 1] * u22
        c11 = np.conj(u11) * bu11 + np.conj(u21) * bu21
        c12 = np.conj(u11) * bu12 + np.conj(u21) * bu22
        c22 = np.conj(u12) * bu12 + np.conj(u22) * bu22
        return c11.real, c12, c22.real

    def __call__(self, theta, phi, psi):
        c11, c12, c22 = self.conjugated(theta, phi, psi)
        r = self.r
        # M = R C R with R = A^{-1/2} Hermitian
        rc11 = r[0, 0] * c11 + r[0, 1] * np.conj(c12)
        rc12 = r[0, 0] * c12 + r[0, 1] * c22
        rc21 = r[1, 0] * c11 + r[1, 1] * np.conj(c12)
        rc22 = r[1, 0] * c12 + r[1, 1] * c22
        m11 = (rc11 * r[0, 0] + rc12 * r[1, 0]).real
        m12 = rc11 * r[0, 1] + rc12 * r[1, 1]
        m22 = (rc21 * r[0, 1] + rc22 * r[1, 1]).real
        half = (m11 + m22) / 2
        rad = np.sqrt(((m11 - m22) / 2) ** 2 + np.abs(m12) ** 2)
        lam_hi = half + rad
        lam_lo = (m11 * m22 - np.abs(m12) ** 2) / lam_hi
        logs = np.stack([np.log(lam_hi), np.log(lam_lo)], axis=-1)
        return self.sign * batched_gauge(self.norm, logs)


def _grid_search_2x2(inst: ProcrustesInstance, sign: float) -> tuple[float, np.ndarray]:
    f = _TwoByTwo(inst, sign)
    n = GRID_POINTS
    spans = np.array([math.pi / 2, 2 * math.pi, 2 * math.pi])
    h = spans / n
    th = np.arange(n) * h[0] + h[0] / 2
    ph = np.arange(n) * h[1]
    ps = np.arange(n) * h[2]
    best_val, best = math.inf, None
    P, S = np.meshgrid(ph, ps, indexing="ij")
    for t in th:
        vals = f(t, P, S)
        k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[k] < best_val:
            best_val, best = float(vals[k]), np.array([t, ph[k[0]], ps[k[1]]])

    for _ in range(REFINE_PASSES):
        h = h / REFINE_FACTOR
        offs = np.arange(-REFINE_FACTOR, REFINE_FACTOR + 1)
        T, P, S = np.meshgrid(
            best[0] + offs * h[0], best[1] + offs * h[1], best[2] + offs * h[2], indexing="ij"
        )
        vals = f(T, P, S)
        k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[k] < best_val:
            best_val, best = float(vals[k]), np.array([T[k], P[k], S[k]])

    # coordinate descent polish
    width = h * REFINE_FACTOR
    for _ in range(20):
        start = best_val
        for axis in range(3):
            def line(x, axis=axis):
                q = best.copy()
                q[axis] = x
                return float(f(*q))

            lo, hi = best[axis] - width[axis], best[axis] + width[axis]
            res = scipy.optimize.minimize_scalar(
                line, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
            )
            if res.fun < best_val:
                best_val = float(res.fun)
                best[axis] = res.x
        if start - best_val < 1e-15:
            break
        width = width / 2
    u11, u12, u21, u22 = _su2(*best)
    u = np.array([[u11, u12], [u21, u22]], dtype=complex)
    return best_val, u


class _Chart:
    """``F(U0 exp(X(x)))`` on the exponential chart around ``U0``."""

    def __init__(self, inst: ProcrustesInstance, sign: float):
        self.d = inst.d
        self.norm = inst.norm
        self.sign = sign
        self.b = np.array(inst.B)
        self.r = _inv_sqrt(np.array(inst.A))
        d = self.d
        self.iu = np.triu_indices(d, 1)

    def skew(self, x: np.ndarray) -> np.ndarray:
        d = self.d
        m = len(self.iu[0])
        s = np.zeros((d, d), dtype=complex)
        s[self.iu] = x[:m] + 1j * x[m : 2 * m]
        s = s - s.conj().T
        s[np.diag_indices(d)] = 1j * x[2 * m :]
        return s

    def value_at(self, u: np.ndarray) -> float:
        c = u.conj().T @ self.b @ u
        m = self.r @ c @ self.r
        lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
        return float(self.sign * batched_gauge(self.norm, np.log(lam)[None, :])[0])

    def unitary(self, u0: np.ndarray, x: np.ndarray) -> np.ndarray:
        return u0 @ scipy.linalg.expm(self.skew(x))


def _polish(chart: _Chart, u: np.ndarray, seed, probes: int = 60) -> tuple[float, np.ndarray]:
    n = chart.d * chart.d
    best = chart.value_at(u)
    for _ in range(4):
        res = scipy.optimize.minimize(
            lambda x: chart.value_at(chart.unitary(u, x)),
            np.zeros(n),
            method="BFGS",
            options={"gtol": 1e-10},
        )
        if res.fun < best:
            best, u = float(res.fun), chart.unitary(u, res.x)
        else:
            break
    # random-direction line search to get past kinks of non-smooth gauges
    rng = np.random.default_rng(seed)
    eps = 1e-2
    while eps > 1e-7:
        improved = False
        for _ in range(probes):
            x = random_skew(chart.d, rng)
            for s in (eps, -eps):
                cand = u @ scipy.linalg.expm(s * x)
                val = chart.value_at(cand)
                if val < best - 1e-15:
                    # extend along the successful direction
                    step = s
                    while True:
                        step *= 2
                        nxt = u @ scipy.linalg.expm(step * x)
                        nv = chart.value_at(nxt)
                        if nv < val:
                            cand, val = nxt, nv
                        else:
                            break
                    best, u, improved = val, cand, True
                    break
        if not improved:
            eps /= 4
    return best, u


def brute_force(
    inst: ProcrustesInstance,
    mode: str = "min",
    budget: int = 20,
    seed=0,
    max_dim: int = 4,
) -> tuple[float, OrbitPoint]:
    """Best value of ``F_N`` over the orbit of ``B`` found by direct search.

    ``d = 2``: a 120^3 grid over ``U(θ, φ, ψ) ∈ SU(2)``, two local refinements
    (10x finer each) and a coordinate-descent polish. ``d >= 3``: ``budget``
    Haar-random starts, each polished by BFGS on the exponential chart and a
    random-direction line search. Restart ``k`` uses the stream ``(seed, k)``.
    """
    if mode not in ("min", "max"):
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    d = inst.d
    if d > max_dim:
        raise DimensionGuardError(f"brute force limited to d <= {max_dim}, got d = {d}")
    sign = 1.0 if mode == "min" else -1.0
    if d == 1:
        u = np.eye(1, dtype=complex)
        val = _Chart(inst, sign).value_at(u)
    elif d == 2:
        val, u = _grid_search_2x2(inst, sign)
    else:
        chart = _Chart(inst, sign)
        val, u = math.inf, None
        seed_int = int(np.random.SeedSequence(seed).generate_state(1)[0])
        for k in range(budget):
            start = haar_unitary(d, np.random.default_rng([seed_int, k]))
            v, w = _polish(chart, np.array(start), [seed_int, k, 1])
            if v < val:
                val, u = v, w
    return sign * val, OrbitPoint.from_unitary(inst, u)


def brute_force_min(inst: ProcrustesInstance, mode: str = "min", budget: int = 20, seed=0, max_dim: int = 4):
    return brute_force(inst, mode, budget, seed, max_dim)
