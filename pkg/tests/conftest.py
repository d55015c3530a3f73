import hypothesis
import pytest

from rtscts.geometry import NetworkParams

import _report

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=60,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("suite")


@pytest.fixture
def default_params() -> NetworkParams:
    # r_cs=2, r_tx=1, d=2, alpha=4, unit power and amplitude
    return NetworkParams.make(0.05)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _report.LINES:
            terminalreporter.write_line(line)
