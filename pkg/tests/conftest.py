"""Acceptance reporting: one pass/fail line per criterion in the terminal summary.

Tests marked ``@pytest.mark.criterion(n)`` may add a detail string through the
``detail`` fixture; the line is recorded from the test outcome, so a test that
errors still reports FAIL.
"""

import pytest

_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.stash[_KEY] = {}


@pytest.fixture
def detail(request):
    notes = []
    request.node.stash[_KEY] = notes
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        if mark is not None and rep.when == "setup" and rep.failed:
            item.config.stash[_KEY][mark.args[0]] = ("FAIL", "setup error")
        return
    notes = item.stash.get(_KEY, [])
    item.config.stash[_KEY][mark.args[0]] = ("PASS" if rep.passed else "FAIL", "; ".join(notes))


def pytest_terminal_summary(terminalreporter, config):
    res = config.stash[_KEY]
    if not res:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(res):
        status, note = res[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}" + (f" - {note}" if note else ""))
