import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from phonon_blockade.model import reference_params

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def ref_params():
    return reference_params()


def random_dm(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# acceptance lines collected by tests/test_acceptance.py and printed at the end
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
