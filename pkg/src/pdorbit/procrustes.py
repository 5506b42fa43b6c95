"""The log-distance on the unitary orbit of B and its closed-form extremizers.

For positive definite ``A``, ``B`` and a unitarily invariant norm ``N``,

    F_N(C) = N(log(A^{-1/2} C A^{-1/2})),    C = U* B U.

The minimum over the orbit is attained by placing the eigenvalues of ``B`` in
non-increasing order along the ordered eigenbasis of ``A``; the maximum by
placing them in non-decreasing order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .matcore import (
    DimensionError,
    MatrixError,
    SpectralDecomposition,
    as_matrix,
    eigh,
    positive_definite,
    spectral_map,
)
from .uinorms import FROBENIUS, NormSpec, evaluate, vector_norm


class OrbitMembershipError(MatrixError):
    pass


@dataclass(frozen=True)
class ProcrustesInstance:
    """The triple ``(A, B, N)``; spectral caches are built eagerly."""

    A: np.ndarray
    B: np.ndarray
    norm: NormSpec = FROBENIUS
    tols: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)
    a_spec: SpectralDecomposition = field(init=False, repr=False)
    b_spec: SpectralDecomposition = field(init=False, repr=False)
    a_sqrt: np.ndarray = field(init=False, repr=False)
    a_inv_sqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = positive_definite(self.A, self.tols)
        b = positive_definite(self.B, self.tols)
        if a.shape != b.shape:
            raise DimensionError(f"A is {a.shape[0]}x{a.shape[0]} but B is {b.shape[0]}x{b.shape[0]}")
        set_ = object.__setattr__
        set_(self, "A", a)
        set_(self, "B", b)
        a_spec = eigh(a, self.tols)
        set_(self, "a_spec", a_spec)
        set_(self, "b_spec", eigh(b, self.tols))
        set_(self, "a_sqrt", spectral_map(a_spec, "sqrt"))
        set_(self, "a_inv_sqrt", spectral_map(a_spec, "inv_sqrt"))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def with_norm(self, norm: NormSpec) -> "ProcrustesInstance":
        return ProcrustesInstance(self.A, self.B, norm, self.tols)

    @property
    def degenerate_spectrum(self) -> bool:
        """True when ``A`` has a repeated eigenvalue, making the extremizers non-unique."""
        lam = self.a_spec.eigenvalues
        return bool(np.any(np.diff(lam) > -self.tols.orbit * lam[0]))


@dataclass(frozen=True)
class OrbitPoint:
    """A point ``C = W* B W`` of the orbit together with its witness ``W``."""

    C: np.ndarray
    witness: np.ndarray

    @classmethod
    def from_unitary(cls, inst: ProcrustesInstance, u) -> "OrbitPoint":
        u = as_matrix(u)
        c = u.conj().T @ inst.B @ u
        return cls(_freeze((c + c.conj().T) / 2), _freeze(u))

    @classmethod
    def from_matrix(cls, inst: ProcrustesInstance, c) -> "OrbitPoint":
        """Validate membership of ``c`` in the orbit of ``B`` and recover a witness."""
        c = as_matrix(c)
        if c.shape != inst.B.shape:
            raise DimensionError(f"C is {c.shape[0]}x{c.shape[0]} but B is {inst.d}x{inst.d}")
        c_spec = eigh(c, inst.tols)
        lam_b = inst.b_spec.eigenvalues
        mismatch = float(np.max(np.abs(c_spec.eigenvalues - lam_b)))
        if mismatch > inst.tols.orbit * max(1.0, lam_b[0]):
            raise OrbitMembershipError(
                f"C is not in the unitary orbit of B: spectra differ by {mismatch:.3e} "
                f"(C: {np.round(c_spec.eigenvalues, 10).tolist()}, "
                f"B: {np.round(lam_b, 10).tolist()})"
            )
        w = inst.b_spec.basis @ c_spec.basis.conj().T
        c = (c + c.conj().T) / 2
        return cls(_freeze(c), _freeze(w))


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _as_c(c) -> np.ndarray:
    return c.C if isinstance(c, OrbitPoint) else as_matrix(c)


def relative_matrix(inst: ProcrustesInstance, c) -> np.ndarray:
    """``A^{-1/2} C A^{-1/2}``."""
    m = inst.a_inv_sqrt @ _as_c(c) @ inst.a_inv_sqrt
    return (m + m.conj().T) / 2


def log_relative_spectrum(inst: ProcrustesInstance, c) -> np.ndarray:
    """``log λ(A^{-1} C)`` in non-increasing order."""
    return np.log(eigh(relative_matrix(inst, c), inst.tols).eigenvalues)


def objective(inst: ProcrustesInstance, c) -> float:
    """``F_N(C)`` evaluated from the log-spectrum directly (one eigensolve)."""
    return vector_norm(inst.norm, log_relative_spectrum(inst, c))


def distance_FN(inst: ProcrustesInstance, c) -> float:
    """``N(log(A^{-1/2} C A^{-1/2}))`` through the matrix logarithm."""
    log_m = spectral_map(eigh(relative_matrix(inst, c), inst.tols), "log")
    return evaluate(inst.norm, log_m, inst.tols)


def distance_F2(inst: ProcrustesInstance, c) -> float:
    """Riemannian (Frobenius) distance ``[Σ log² λ_j(A^{-1}C)]^{1/2}``."""
    return float(np.sqrt(np.sum(log_relative_spectrum(inst, c) ** 2)))


@dataclass(frozen=True)
class Extremizer:
    point: OrbitPoint
    value: float
    degenerate_spectrum: bool
    mode: str

    @property
    def C(self) -> np.ndarray:
        return self.point.C


def _aligned(inst: ProcrustesInstance, mode: str) -> Extremizer:
    u = inst.a_spec.basis
    lam_b = inst.b_spec.eigenvalues
    placed = lam_b if mode == "min" else lam_b[::-1]
    c = (u * placed) @ u.conj().T
    c = (c + c.conj().T) / 2
    # C = U D U* and B = V_B D_B V_B*, so W = V_B P U* with P the reversal for max
    vb = inst.b_spec.basis if mode == "min" else inst.b_spec.basis[:, ::-1]
    witness = vb @ u.conj().T
    value = vector_norm(inst.norm, np.log(placed) - np.log(inst.a_spec.eigenvalues))
    return Extremizer(OrbitPoint(_freeze(c), _freeze(witness)), value, inst.degenerate_spectrum, mode)


def global_minimizer(inst: ProcrustesInstance) -> Extremizer:
    """``C* = U D_{λ↓(B)} U*`` for ``A = U D_{λ↓(A)} U*``."""
    return _aligned(inst, "min")


def global_maximizer(inst: ProcrustesInstance) -> Extremizer:
    """``C† = U D_{λ↑(B)} U*``, the anti-aligned point."""
    return _aligned(inst, "max")


def min_value(inst: ProcrustesInstance) -> float:
    la = np.log(inst.a_spec.eigenvalues)
    lb = np.log(inst.b_spec.eigenvalues)
    return vector_norm(inst.norm, lb - la)


def max_value(inst: ProcrustesInstance) -> float:
    la = np.log(inst.a_spec.eigenvalues)
    lb = np.log(inst.b_spec.eigenvalues)
    return vector_norm(inst.norm, lb[::-1] - la)


def _pd_pair(a, b, tols: Tolerances):
    a = positive_definite(a, tols)
    b = positive_definite(b, tols)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def bw_distance(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Bures-Wasserstein distance ``[tr A + tr B - 2 tr (A^{1/2} B A^{1/2})^{1/2}]^{1/2}``."""
    a, b = _pd_pair(a, b, tols)
    a_half = spectral_map(eigh(a, tols), "sqrt")
    m = a_half @ b @ a_half
    cross = np.sum(np.sqrt(np.clip(eigh((m + m.conj().T) / 2, tols).eigenvalues, 0.0, None)))
    sq = np.trace(a).real + np.trace(b).real - 2.0 * cross
    return float(np.sqrt(max(sq, 0.0)))


def kl_divergence(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """KL divergence of centred Gaussians, ``½[tr(B^{-1}A) - d + log(det B / det A)]``."""
    a, b = _pd_pair(a, b, tols)
    b_spec = eigh(b, tols)
    b_is = spectral_map(b_spec, "inv_sqrt")
    m = b_is @ a @ b_is
    # tr(B^{-1}A) - log det(B^{-1}A) over the eigenvalues of B^{-1/2} A B^{-1/2}
    mu = eigh((m + m.conj().T) / 2, tols).eigenvalues
    return float(max(0.5 * np.sum(mu - 1.0 - np.log(mu)), 0.0))
