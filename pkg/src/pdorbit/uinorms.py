"""Unitarily invariant norms as symmetric gauge functions of singular values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .matcore import as_matrix, eigh

KINDS = ("schatten", "kyfan", "spectral")


@dataclass(frozen=True)
class NormSpec:
    """A unitarily invariant norm.

    ``schatten`` with ``p = inf`` is canonicalised to ``spectral`` on
    construction, so there is one code path for the maximum norm.
    """

    kind: str
    p: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "schatten":
            if self.p is None or not self.p >= 1:
                raise ValueError(f"schatten norm needs p >= 1, got {self.p}")
            if math.isinf(self.p):
                object.__setattr__(self, "kind", "spectral")
                object.__setattr__(self, "p", None)
            else:
                object.__setattr__(self, "p", float(self.p))
        if self.kind == "kyfan":
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValueError(f"ky fan norm needs integer k >= 1, got {self.k}")
            object.__setattr__(self, "k", int(self.k))

    @classmethod
    def schatten(cls, p: float) -> "NormSpec":
        return cls("schatten", p=p)

    @classmethod
    def kyfan(cls, k: int) -> "NormSpec":
        return cls("kyfan", k=k)

    @classmethod
    def spectral(cls) -> "NormSpec":
        return cls("spectral")

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """Parse the CLI spelling ``schatten:p``, ``kyfan:k`` or ``spectral``."""
        name, _, arg = text.strip().partition(":")
        if name == "spectral" and not arg:
            return cls.spectral()
        if name == "schatten" and arg:
            return cls.schatten(float(arg))
        if name == "kyfan" and arg:
            return cls.kyfan(int(arg))
        raise ValueError(f"cannot parse norm {text!r}; use schatten:p, kyfan:k or spectral")

    @property
    def label(self) -> str:
        if self.kind == "schatten":
            p = self.p
            return f"schatten:{int(p) if p == int(p) else p}"
        if self.kind == "kyfan":
            return f"kyfan:{self.k}"
        return "spectral"

    def __str__(self) -> str:
        return self.label


FROBENIUS = NormSpec.schatten(2)


def vector_norm(norm: NormSpec, x) -> float:
    a = np.abs(np.asarray(x, dtype=float).reshape(-1))
    if norm.kind == "spectral":
        return float(a.max(initial=0.0))
    if norm.kind == "kyfan":
        if norm.k > len(a):
            raise ValueError(f"ky fan k={norm.k} exceeds vector length {len(a)}")
        return float(np.sort(a)[::-1][: norm.k].sum())
    p = norm.p
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    # scaled to avoid overflow for large p
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def singular_values(m, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Singular values in non-increasing order.

    Hermitian input goes through :func:`eigh`; general input through the
    eigenvalues of ``M* M``.
    """
    a = as_matrix(m)
    if np.allclose(a, a.conj().T, rtol=0, atol=tols.herm * max(1.0, np.linalg.norm(a))):
        return np.sort(np.abs(eigh(a, tols).eigenvalues))[::-1]
    lam = eigh(a.conj().T @ a, tols).eigenvalues
    return np.sqrt(np.clip(lam, 0.0, None))


def evaluate(norm: NormSpec, m, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    return vector_norm(norm, singular_values(m, tols))


def is_strictly_convex(norm: NormSpec) -> bool:
    return norm.kind == "schatten" and 1 < norm.p < math.inf
