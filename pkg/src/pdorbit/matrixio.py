"""Matrix files and report serialisation.

A matrix file is JSON::

    {"d": 2, "entries": [[re, im], [re, im], [re, im], [re, im]]}

with ``entries`` in row-major order. Floats are written with ``repr`` so a
write/read round trip is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np


class MatrixFileError(ValueError):
    pass


def matrix_to_document(m) -> dict:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixFileError(f"expected a square matrix, got shape {a.shape}")
    return {"d": a.shape[0], "entries": [[float(z.real), float(z.imag)] for z in a.reshape(-1)]}


def dumps_matrix(m) -> str:
    return json.dumps(matrix_to_document(m), indent=1) + "\n"


def write_matrix(path, m) -> None:
    Path(path).write_text(dumps_matrix(m))


def _entry_line(text: str, index: int) -> int | None:
    # best-effort line lookup for diagnostics: the index-th "[" after "entries"
    pos = text.find('"entries"')
    if pos < 0:
        return None
    pos = text.find("[", pos)
    for _ in range(index + 1):
        pos = text.find("[", pos + 1)
        if pos < 0:
            return None
    return text.count("\n", 0, pos) + 1


def loads_matrix(text: str, source: str = "<string>") -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise MatrixFileError(f"{source}: top level must be an object with fields 'd' and 'entries'")
    missing = [k for k in ("d", "entries") if k not in doc]
    if missing:
        raise MatrixFileError(f"{source}: missing field(s) {missing}")
    extra = sorted(set(doc) - {"d", "entries"})
    if extra:
        raise MatrixFileError(f"{source}: unknown field(s) {extra}")
    d = doc["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise MatrixFileError(f"{source}: field 'd' must be a positive integer, got {d!r}")
    entries = doc["entries"]
    if not isinstance(entries, list):
        raise MatrixFileError(f"{source}: field 'entries' must be a list")
    if len(entries) != d * d:
        raise MatrixFileError(
            f"{source}: field 'entries' has {len(entries)} elements, expected d*d = {d * d}"
        )
    out = np.empty(d * d, dtype=complex)
    for i, e in enumerate(entries):
        ok = (
            isinstance(e, list)
            and len(e) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e)
        )
        if not ok:
            line = _entry_line(text, i)
            where = f"line {line}, " if line else ""
            raise MatrixFileError(f"{source}: {where}entries[{i}] must be a [re, im] pair, got {e!r}")
        out[i] = complex(float(e[0]), float(e[1]))
    return out.reshape(d, d)


def read_matrix(path) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise MatrixFileError(f"{path}: {exc.strerror}") from exc
    return loads_matrix(text, str(path))


def to_jsonable(obj):
    """Convert numpy scalars/arrays (complex included) into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
                return matrix_to_document(obj)
            return [[float(z.real), float(z.imag)] for z in obj.reshape(-1)]
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps_report(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=1, sort_keys=True) + "\n"


def curve_csv(curve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "value", "residual"])
    for t, v, r in zip(curve.t, curve.values, curve.residuals):
        w.writerow([repr(float(t)), repr(float(v)), repr(float(r))])
    return buf.getvalue()


def certificate_to_dict(cert) -> dict:
    out = {
        "verdict": cert.verdict,
        "gap_min": cert.gap_min,
        "gap_max": cert.gap_max,
        "value": cert.value,
        "min_value": cert.min_value,
        "max_value": cert.max_value,
        "tol": cert.tol,
        "degenerate_spectrum": cert.degenerate_spectrum,
        "value_optimal_only": cert.value_optimal_only,
        "witness": cert.witness,
    }
    if cert.descent is not None:
        c = cert.descent
        out["descent"] = {
            "kind": c.kind,
            "t_range": list(c.t_range),
            "samples": len(c.t),
            "value_at_zero": c.value_at_zero,
            "min_value": float(c.values.min()),
            "converged": c.converged,
        }
    else:
        out["descent"] = None
    return out
