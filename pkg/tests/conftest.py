import numpy as np
import pytest

from tacsim.geometry import Grid
from tacsim.optical import calibrate_lut, sphere_presses

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion from the build contract")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    _ACCEPTANCE.setdefault(number, [title, True])
    _ACCEPTANCE[number][1] &= report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title}")


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def presses():
    return sphere_presses(9)


@pytest.fixture(scope="session")
def lut(presses):
    return calibrate_lut(presses)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
