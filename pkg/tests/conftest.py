from __future__ import annotations

import pytest

from subtile.catalog import load_bundled
from subtile.tower import system_perron


@pytest.fixture(scope="session")
def penrose():
    return load_bundled("penrose")


@pytest.fixture(scope="session")
def chair():
    return load_bundled("chair")


@pytest.fixture(scope="session")
def square():
    return load_bundled("square")


@pytest.fixture(scope="session")
def penrose_perron(penrose):
    return system_perron(penrose)


@pytest.fixture(scope="session")
def F10(penrose):
    return penrose.field


@pytest.fixture(scope="session")
def phi(F10):
    return F10.golden_ratio


_criteria: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    n, title = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[n] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, verdict = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {title}")
