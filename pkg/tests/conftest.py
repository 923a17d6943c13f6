import pytest

from qmeta.config import Config
from qmeta.scenarios import scenario_prime, scenario_probe, scenario_rabi_check

# criterion number -> (passed, message); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def default_prime():
    """Priming scenario with every default, run until both pulses have left."""
    return scenario_prime(Config())


@pytest.fixture(scope="session")
def weak_prime():
    """Priming in the weak-drive regime where the local Rabi picture holds."""
    cfg = Config().with_section("pulses", A=0.03).with_section("run", dt=0.05, order=2)
    return scenario_prime(cfg)


@pytest.fixture(scope="session")
def frozen_probe():
    return scenario_probe(Config(), mode="frozen")


@pytest.fixture(scope="session")
def live_probe():
    return scenario_probe(Config(), mode="live")


@pytest.fixture(scope="session")
def rabi_check():
    return scenario_rabi_check(Config())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {msg}")
