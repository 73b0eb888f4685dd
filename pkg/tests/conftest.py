import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ipm_strip.spectral import OMEGA, Spectrum, threshold_mask

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    return ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_omega(P, Q, rng, m=None, zero_mean=False, real=True):
    c = rng.normal(size=(2 * P + 1, Q)) + 1j * rng.normal(size=(2 * P + 1, Q))
    if m is not None:
        c = c * threshold_mask(P, Q, OMEGA, m)
    if zero_mean:
        c[P] = 0
    s = Spectrum(c, OMEGA)
    return s.enforce_reality() if real else s


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda n: int(n.split("-")[1])):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name} {'PASS' if passed else 'FAIL'}  {detail}")
