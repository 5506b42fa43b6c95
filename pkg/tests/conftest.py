import zlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def rand_unitary(d, rng):
    # independent of the package: QR of a Ginibre matrix via numpy
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_pd(d, rng, spread=2.0):
    u = rand_unitary(d, rng)
    lam = np.exp(rng.uniform(-spread, spread, d))
    m = (u * lam) @ u.conj().T
    return (m + m.conj().T) / 2


@pytest.fixture
def rng(request):
    # a fresh stream per test, keyed by the test name
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
