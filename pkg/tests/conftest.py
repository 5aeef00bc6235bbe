import sys
import os

import pytest
from hypothesis import HealthCheck, settings

from coupler_lab.hammod import reference_system

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


@pytest.fixture(scope="session")
def device():
    return reference_system()


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    out = [mod.RESULTS[k] for k in sorted(mod.RESULTS)] if mod else []
    if out:
        terminalreporter.section("acceptance criteria")
        for line in out:
            terminalreporter.write_line(line)
