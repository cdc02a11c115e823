import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from memsl_imaging import build_basis, derive_dimensionless  # noqa: E402

WORKED = dict(f=10e-3, wavelength=780e-9, d=50.8e-3, Y=300e-9)

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture(scope="session")
def system():
    return derive_dimensionless(WORKED["f"], WORKED["wavelength"], WORKED["d"], WORKED["Y"])


@pytest.fixture(scope="session")
def basis(system):
    return build_basis(system.c, 20)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    if rep.when == "call" or rep.failed:
        prev = _criteria.get(number, (title, True))
        _criteria[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {title}")
