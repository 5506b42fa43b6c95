import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pdorbit.matrixio import (
    MatrixFileError,
    curve_csv,
    dumps_matrix,
    dumps_report,
    loads_matrix,
    read_matrix,
    write_matrix,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.integers(1, 6).flatmap(lambda d: st.tuples(arrays(np.float64, (d, d), elements=finite), arrays(np.float64, (d, d), elements=finite))))
def test_roundtrip_bit_exact(parts):
    m = parts[0] + 1j * parts[1]
    back = loads_matrix(dumps_matrix(m))
    assert back.tobytes() == m.astype(complex).tobytes()


def test_file_roundtrip(tmp_path, rng):
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    p = tmp_path / "m.json"
    write_matrix(p, m)
    assert read_matrix(p).tobytes() == m.tobytes()


def test_format_fields():
    doc = json.loads(dumps_matrix(np.array([[1, 2j], [-2j, 3]])))
    assert doc == {"d": 2, "entries": [[1.0, 0.0], [0.0, 2.0], [0.0, -2.0], [3.0, 0.0]]}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('{"d": 2, "entries": [[1, 0], [0, 0], [1, 0]]}', "expected d*d = 4"),
        ('{"d": 1}', "missing"),
        ('{"d": 1, "entries": [[1, 0]], "extra": 1}', "unknown field"),
        ('{"d": 0, "entries": []}', "positive integer"),
        ('{"d": true, "entries": [[1, 0]]}', "positive integer"),
        ('{"d": 1, "entries": [[1]]}', "entries[0]"),
        ('{"d": 1, "entries": [["1", 0]]}', "entries[0]"),
        ('{"d": 1, "entries": "x"}', "must be a list"),
        ("[1, 2]", "top level"),
        ('{"d": 1,\n "entries": [[1, 0]', "line 2"),
    ],
)
def test_rejections(text, fragment):
    with pytest.raises(MatrixFileError) as exc:
        loads_matrix(text, "m.json")
    assert fragment in str(exc.value)
    assert str(exc.value).startswith("m.json")


def test_bad_entry_reports_line():
    text = '{\n "d": 2,\n "entries": [\n  [1, 0],\n  [0, 0],\n  [0, "x"],\n  [1, 0]\n ]\n}'
    with pytest.raises(MatrixFileError, match="line 6"):
        loads_matrix(text)


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFileError):
        read_matrix(tmp_path / "nope.json")


def test_report_serialises_numpy():
    text = dumps_report({"b": np.float64(1.5), "a": np.array([1, 2]), "ok": np.bool_(True), "m": np.eye(2) * 1j})
    doc = json.loads(text)
    assert doc["a"] == [1, 2] and doc["b"] == 1.5 and doc["ok"] is True
    assert doc["m"]["d"] == 2
    assert list(doc) == sorted(doc)


def test_curve_csv():
    class Curve:
        t = np.array([0.0, 0.1])
        values = np.array([1.0, 0.9])
        residuals = np.array([0.0, 1e-13])

    lines = curve_csv(Curve()).splitlines()
    assert lines == ["t,value,residual", "0.0,1.0,0.0", "0.1,0.9,1e-13"]
