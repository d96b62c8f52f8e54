"""Shared fixtures and hypothesis configuration."""

import math

import pytest
from hypothesis import HealthCheck, settings

from udw.correlators import BathParams, DetectorParams

settings.register_profile("udw", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("udw")


@pytest.fixture
def unit_bath():
    return BathParams(1.0)


@pytest.fixture
def vacuum():
    return BathParams(math.inf)


@pytest.fixture
def unit_detector():
    return DetectorParams(omega=1.0, gbar=1.0, tau_s=0.1)


# -- acceptance report ------------------------------------------------------------------
#
# Tests marked ``@pytest.mark.criterion(n)`` belong to acceptance criterion n.
# A criterion passes when every test attached to it passes; one line per
# criterion is printed at the end of the session.

_CRITERIA: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to acceptance criterion n")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = _CRITERION_OF.get(report.nodeid)
    if number is not None:
        _CRITERIA.setdefault(number, []).append((report.nodeid.split("::")[-1], report.outcome))


_CRITERION_OF: dict[str, int] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERION_OF[item.nodeid] = int(mark.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}{detail}")
