import numpy as np
import pytest

_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance.append((name, "PASS" if report.passed else "FAIL"))
    elif report.when == "setup" and not report.passed:
        _acceptance.append((name, "FAIL" if report.failed else "SKIP"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status in _acceptance:
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
