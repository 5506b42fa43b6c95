"""Numerical tolerances and run configuration."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

CONFIG_ENV_VAR = "PDORBIT_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Every named tolerance used by the library.

    Relative tolerances (``*_rel``) are multiplied by a matrix scale
    (Frobenius norm or largest singular value) at the point of use.
    """

    herm: float = 1e-10
    unitary: float = 1e-10
    recon_rel: float = 1e-9
    eps_pd: float = 1e-12
    null_rel: float = 1e-8
    jacobi_rel: float = 1e-13
    cluster_rel: float = 1e-10
    max_sweeps: int = 60
    majorization: float = 1e-9
    orbit: float = 1e-8
    comm_rel: float = 1e-10
    probe: float = 1e-8
    certify: float = 1e-7

    def replace(self, **changes: Any) -> "Tolerances":
        return dataclasses.replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class RunConfig:
    """Configuration for CLI runs and the acceptance suite.

    ``scale`` multiplies every trial count of the acceptance suite (values
    below 1 give a quick smoke run). ``criterion_tolerances`` overrides the
    pass thresholds of individual acceptance criteria by key (``"*"`` for
    all); ``criteria`` restricts the suite to the named criteria.
    """

    seed: int = 1
    norm: str = "schatten:2"
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str | None = None
    format: str = "json"
    dims: tuple[int, ...] = (2, 3, 4, 5, 6)
    trials: int = 1000
    scale: float = 1.0
    criterion_tolerances: dict[str, float] = field(default_factory=dict)
    criteria: tuple[str, ...] | None = None

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "tolerances" in kwargs:
            tol_data = kwargs["tolerances"]
            tol_known = {f.name for f in dataclasses.fields(Tolerances)}
            bad = set(tol_data) - tol_known
            if bad:
                raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
            kwargs["tolerances"] = Tolerances(**tol_data)
        if kwargs.get("criteria") is not None:
            kwargs["criteria"] = tuple(kwargs["criteria"])
        if "dims" in kwargs:
            kwargs["dims"] = tuple(int(d) for d in kwargs["dims"])
        if "norm" in kwargs:
            from .uinorms import NormSpec

            try:
                NormSpec.parse(kwargs["norm"])
            except (ValueError, AttributeError) as exc:
                raise ConfigError(f"bad norm: {exc}") from None
        if kwargs.get("format", "json") not in ("json", "csv"):
            raise ConfigError(f"unsupported output format {kwargs['format']!r}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "RunConfig":
        """Load from ``path``, else from ``$PDORBIT_CONFIG``, else defaults."""
        if path is None:
            path = os.environ.get(CONFIG_ENV_VAR)
        if not path:
            return cls()
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_mapping(data)
