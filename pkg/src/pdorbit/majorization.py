"""Vector (sub)majorization and the multiplicative Lidskii (GNL) bounds.

For positive definite ``A`` and ``B`` the log-spectra satisfy::

    log λ↓(B) - log λ↓(A)  ≺  log λ(A^{-1/2} B A^{-1/2})  ≺  log λ↓(B) - log λ↑(A)

and the left relation is an equality exactly when ``A`` and ``B`` are
diagonal, both non-increasing, in a common orthonormal basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .matcore import SpectralDecomposition, eigh, spectral_map

ORDERINGS = ("unordered", "non-increasing", "non-decreasing")


@dataclass(frozen=True)
class SpectrumVector:
    values: np.ndarray
    ordering: str = "unordered"

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.ordering!r}")
        diffs = np.diff(v)
        if self.ordering == "non-increasing" and np.any(diffs > 0):
            raise ValueError("values are not non-increasing")
        if self.ordering == "non-decreasing" and np.any(diffs < 0):
            raise ValueError("values are not non-decreasing")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)

    @classmethod
    def decreasing(cls, values) -> "SpectrumVector":
        return cls(np.sort(np.asarray(values, dtype=float))[::-1], "non-increasing")


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return x, y


def submajorizes(x, y, tol: float = 1e-9) -> bool:
    """True iff ``x ≺_w y``: every partial sum of x↓ is at most that of y↓ (+ tol)."""
    x, y = _pair(x, y)
    sx = np.cumsum(np.sort(x)[::-1])
    sy = np.cumsum(np.sort(y)[::-1])
    return bool(np.all(sx <= sy + tol))


def majorizes(x, y, tol: float = 1e-9) -> bool:
    """True iff ``x ≺ y``: submajorized with equal totals (within ``tol * d``)."""
    x, y = _pair(x, y)
    return submajorizes(x, y, tol) and abs(x.sum() - y.sum()) <= tol * len(x)


def majorization_violation(x, y) -> float:
    """Largest amount by which ``x ≺ y`` fails (<= 0 when it holds exactly)."""
    x, y = _pair(x, y)
    sx = np.cumsum(np.sort(x)[::-1])
    sy = np.cumsum(np.sort(y)[::-1])
    return float(max(np.max(sx - sy), abs(sx[-1] - sy[-1]) / len(x)))


def congruence(
    a, b, tols: Tolerances = DEFAULT_TOLERANCES, *, a_spec: SpectralDecomposition | None = None
) -> np.ndarray:
    """``A^{-1/2} B A^{-1/2}``, a Hermitian matrix similar to ``B A^{-1}``."""
    a_is = spectral_map(a_spec if a_spec is not None else eigh(a, tols), "inv_sqrt")
    m = a_is @ np.asarray(b) @ a_is
    return (m + m.conj().T) / 2


def relative_log_spectrum(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """``log λ(B A^{-1})`` in non-increasing order."""
    lam = eigh(congruence(a, b, tols), tols).eigenvalues
    return np.log(lam)


def gnl_bounds(a, b, tols: Tolerances = DEFAULT_TOLERANCES):
    """Return ``(lower, mid, upper)`` of the GNL chain as :class:`SpectrumVector`."""
    a_spec = eigh(a, tols)
    la = np.log(a_spec.eigenvalues)
    lb = np.log(eigh(b, tols).eigenvalues)
    if len(la) != len(lb):
        raise ValueError(f"dimension mismatch: {len(la)} vs {len(lb)}")
    lower = SpectrumVector(lb - la)
    mid_lam = eigh(congruence(a, b, tols, a_spec=a_spec), tols).eigenvalues
    mid = SpectrumVector(np.log(mid_lam), "non-increasing")
    upper = SpectrumVector(lb - la[::-1])
    return lower, mid, upper


def _gap(x, y) -> float:
    return float(np.linalg.norm(np.sort(np.asarray(x))[::-1] - np.sort(np.asarray(y))[::-1]))


def equality_gap(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Euclidean distance between ``(log λ(B) - log λ(A))↓`` and ``log λ(B A^{-1})``."""
    lower, mid, _ = gnl_bounds(a, b, tols)
    return _gap(lower, mid)


def anti_equality_gap(a, b, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Same as :func:`equality_gap` for the right-hand (anti-aligned) bound."""
    _, mid, upper = gnl_bounds(a, b, tols)
    return _gap(mid, upper)


@dataclass(frozen=True)
class GNLReport:
    left_holds: bool
    right_holds: bool
    left_gap: float
    right_gap: float
    left_violation: float
    right_violation: float

    def as_dict(self) -> dict:
        return {
            "left_holds": self.left_holds,
            "right_holds": self.right_holds,
            "left_gap": self.left_gap,
            "right_gap": self.right_gap,
            "left_violation": self.left_violation,
            "right_violation": self.right_violation,
        }


def gnl_verify(a, b, tol: float = 1e-9, tols: Tolerances = DEFAULT_TOLERANCES) -> GNLReport:
    lower, mid, upper = gnl_bounds(a, b, tols)
    return GNLReport(
        left_holds=majorizes(lower, mid, tol),
        right_holds=majorizes(mid, upper, tol),
        left_gap=_gap(lower, mid),
        right_gap=_gap(mid, upper),
        left_violation=majorization_violation(lower, mid),
        right_violation=majorization_violation(mid, upper),
    )
