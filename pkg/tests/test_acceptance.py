"""Every acceptance criterion at its stated tolerance and default scale."""

import pytest

from conftest import ACCEPTANCE_LINES
from pdorbit.acceptance import CRITERIA, run_criterion
from pdorbit.config import RunConfig

# wall-clock targets (seconds) where one is stated
RUNTIME_TARGETS = {"gnl_chain": 30.0, "oracle_extremizers": 300.0}


@pytest.mark.slow
@pytest.mark.parametrize("key", [k for k, _ in CRITERIA])
def test_criterion(key):
    res = run_criterion(RunConfig(), key)
    line = f"{res.line()} [{res.runtime:.1f}s]"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line
    assert not res.tolerance_induced
    if key in RUNTIME_TARGETS:
        assert res.runtime < RUNTIME_TARGETS[key], f"{key} took {res.runtime:.1f}s"
