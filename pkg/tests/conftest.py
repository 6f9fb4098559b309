import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

# JIT compilation happens on first use; no per-example deadline
settings.register_profile("pkg", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reference computations")


@pytest.fixture(scope="session")
def presets():
    from mgriemann.config import load_preset, preset_names
    return {n: load_preset(n) for n in preset_names()}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
