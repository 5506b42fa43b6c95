"""Validated complex matrices, a Jacobi Hermitian eigensolver and spectral calculus.

Matrices are plain ``numpy`` complex arrays. The constructor functions
:func:`hermitian`, :func:`positive_definite` and :func:`unitary` check the
structural invariant and hand back a read-only copy, so downstream code can
rely on it without re-validating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances


class MatrixError(ValueError):
    pass


class DimensionError(MatrixError):
    pass


class NotHermitianError(MatrixError):
    pass


class NotPositiveDefiniteError(MatrixError):
    pass


class NotUnitaryError(MatrixError):
    pass


class SpectralDomainError(MatrixError):
    def __init__(self, func: str, eigenvalue: float):
        super().__init__(
            f"{func} requires positive eigenvalues, got eigenvalue {eigenvalue!r}"
        )
        self.func = func
        self.eigenvalue = eigenvalue


class ConvergenceError(RuntimeError):
    def __init__(self, sweeps: int, residual: float):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {residual:.3e})"
        )
        self.sweeps = sweeps
        self.residual = residual


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_matrix(m) -> np.ndarray:
    """Coerce to a square complex array of dimension at least 1."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a square d x d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixError("matrix has non-finite entries")
    return a


def hermitian(m, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Return ``(M + M*)/2`` after checking ``M`` is Hermitian within ``tols.herm``."""
    a = as_matrix(m)
    asym = np.max(np.abs(a - a.conj().T))
    scale = max(1.0, float(np.linalg.norm(a)))
    if asym > tols.herm * scale:
        raise NotHermitianError(f"matrix is not Hermitian: max |M - M*| = {asym:.3e}")
    return _frozen((a + a.conj().T) / 2)


def positive_definite(m, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    h = hermitian(m, tols)
    lam = eigh(h, tols).eigenvalues
    if lam[-1] <= tols.eps_pd * max(lam[0], 0.0) or lam[-1] <= 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: eigenvalues span [{lam[-1]:.6g}, {lam[0]:.6g}]"
        )
    return h


def unitary(u, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    a = as_matrix(u)
    err = np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]))
    if err > tols.unitary:
        raise NotUnitaryError(f"matrix is not unitary: ||U*U - I||_F = {err:.3e}")
    return _frozen(a)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in non-increasing order with the matching eigenbasis (columns)."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def d(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        u = self.basis
        return (u * self.eigenvalues) @ u.conj().T


def _jacobi(a: np.ndarray, tols: Tolerances) -> tuple[np.ndarray, np.ndarray]:
    # Cyclic row-order sweeps; each rotation is a phase fix on column q
    # followed by a real Givens rotation in the (p, q) plane.
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = tols.jacobi_rel * np.linalg.norm(a)
    off = 0.0
    for _ in range(tols.max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            return a.diagonal().real.copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                ab = abs(b)
                if ab == 0.0:
                    continue
                phase = (b / ab).conjugate()
                theta = (a[q, q].real - a[p, p].real) / (2.0 * ab)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                gqp = -s * phase
                gqq = c * phase
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + gqp * col_q
                a[:, q] = s * col_p + gqq * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + gqp.conjugate() * row_q
                a[q, :] = s * row_p + gqq.conjugate() * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v_p = v[:, p].copy()
                v_q = v[:, q].copy()
                v[:, p] = c * v_p + gqp * v_q
                v[:, q] = s * v_p + gqq * v_q
    raise ConvergenceError(tols.max_sweeps, float(off))


def _canonical_cluster_basis(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(block) from Gram-Schmidt on projected unit vectors.

    At each step the coordinate vector with the largest remaining component
    is taken (lowest index on ties), so the result depends only on the
    subspace, not on the rotation that produced ``block``.
    """
    d, m = block.shape
    proj = block @ block.conj().T
    out: list[np.ndarray] = []
    used: set[int] = set()
    for _ in range(m):
        best_k, best_w, best_norm = -1, None, -1.0
        for k in range(d):
            if k in used:
                continue
            w = proj[:, k].copy()
            for e in out:
                w -= (e.conj() @ w) * e
            nw = np.linalg.norm(w)
            if nw > best_norm + 1e-12:
                best_k, best_w, best_norm = k, w, nw
        used.add(best_k)
        out.append(best_w / best_norm)
    return np.column_stack(out)


def eigh(h, tols: Tolerances = DEFAULT_TOLERANCES) -> SpectralDecomposition:
    """Hermitian eigendecomposition by cyclic complex Jacobi rotations.

    Eigenvalues come back non-increasing. Output is deterministic: clusters of
    (numerically) equal eigenvalues get the canonical Gram-Schmidt basis and
    every simple eigenvector is phased so its largest entry is real positive.
    """
    a = as_matrix(h)
    a = (a + a.conj().T) / 2
    lam, v = _jacobi(a, tols)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    v = v[:, order]

    gap = tols.cluster_rel * np.linalg.norm(a)
    start = 0
    n = len(lam)
    for i in range(1, n + 1):
        if i == n or lam[i - 1] - lam[i] > gap:
            if i - start > 1:
                v[:, start:i] = _canonical_cluster_basis(v[:, start:i])
            else:
                col = v[:, start]
                k = int(np.argmax(np.abs(col)))
                v[:, start] = col * (abs(col[k]) / col[k])
            start = i
    lam.setflags(write=False)
    return SpectralDecomposition(lam, _frozen(v))


def eigvalsh(h, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return eigh(h, tols).eigenvalues


_POSITIVE_ONLY = {"log", "sqrt", "inv_sqrt", "inv"}

SPECTRAL_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda x: 1.0 / np.sqrt(x),
    "inv": lambda x: 1.0 / x,
}


def spectral_map(s: SpectralDecomposition, f: str) -> np.ndarray:
    """Apply a scalar function through the spectral decomposition: ``U f(D) U*``."""
    try:
        func = SPECTRAL_FUNCTIONS[f]
    except KeyError:
        raise ValueError(f"unknown spectral function {f!r}") from None
    lam = s.eigenvalues
    if f in _POSITIVE_ONLY and lam[-1] <= 0:
        raise SpectralDomainError(f, float(lam[-1]))
    u = s.basis
    out = (u * func(lam)) @ u.conj().T
    return _frozen((out + out.conj().T) / 2)


def matrix_function(h, f: str, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return spectral_map(eigh(h, tols), f)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed unitary from the QR factorisation of a complex Ginibre matrix.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; tuples such as
    ``(seed, trial)`` give counter-based independent streams.
    """
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return _frozen(q)


def random_pd(d: int, seed, cond_target: float = 10.0) -> np.ndarray:
    """Random positive definite ``V D V*`` with Haar ``V`` and condition number ``cond_target``.

    The log-spectrum is uniform on an interval of length ``log(cond_target)``
    whose centre is drawn from [-1, 1]; both endpoints are always attained.
    """
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    if not cond_target >= 1:
        raise ValueError(f"cond_target must be >= 1, got {cond_target}")
    rng = _rng(seed)
    width = math.log(cond_target)
    centre = rng.uniform(-1.0, 1.0)
    logs = rng.uniform(0.0, width, size=d)
    if d >= 2:
        logs[0], logs[1] = 0.0, width
    lam = np.exp(logs + centre - width / 2)
    v = haar_unitary(d, rng)
    m = (v * lam) @ v.conj().T
    return _frozen((m + m.conj().T) / 2)


def random_hermitian(d: int, seed) -> np.ndarray:
    rng = _rng(seed)
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return _frozen((x + x.conj().T) / 2)


def commutator(x, y) -> np.ndarray:
    return x @ y - y @ x


def conjugate(c, u) -> np.ndarray:
    """Orbit action ``U* C U``."""
    c = as_matrix(c)
    u = as_matrix(u)
    if c.shape != u.shape:
        raise DimensionError(f"dimension mismatch: {c.shape} vs {u.shape}")
    out = u.conj().T @ c @ u
    return _frozen((out + out.conj().T) / 2)


def commutant_dimension(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Complex dimension of ``{X : AX = XA, BX = XB}``.

    Nullity of the stacked commutator map acting on row-major ``vec(X)``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a.shape[0]
    eye = np.eye(d)
    # row-major vec: vec(MX) = (M kron I) vec(X), vec(XM) = (I kron M^T) vec(X)
    system = np.vstack(
        [np.kron(a, eye) - np.kron(eye, a.T), np.kron(b, eye) - np.kron(eye, b.T)]
    )
    sv = np.linalg.svd(system, compute_uv=False)
    if sv[0] == 0.0:
        return d * d
    rank = int(np.sum(sv > tols.null_rel * sv[0]))
    return d * d - rank
