"""Unitary-orbit Procrustes problems for positive definite matrices."""

from .config import DEFAULT_TOLERANCES, RunConfig, Tolerances
from .extrema import certify, commuting_descent_curve, lift_path, local_probe, spectral_descent_path
from .majorization import gnl_bounds, gnl_verify
from .procrustes import (
    OrbitPoint,
    ProcrustesInstance,
    distance_F2,
    distance_FN,
    global_maximizer,
    global_minimizer,
)
from .uinorms import NormSpec

__all__ = [
    "DEFAULT_TOLERANCES",
    "NormSpec",
    "OrbitPoint",
    "ProcrustesInstance",
    "RunConfig",
    "Tolerances",
    "certify",
    "commuting_descent_curve",
    "distance_F2",
    "distance_FN",
    "global_maximizer",
    "global_minimizer",
    "gnl_bounds",
    "gnl_verify",
    "lift_path",
    "local_probe",
    "spectral_descent_path",
]
