from collections import defaultdict

import pytest

_outcomes = defaultdict(list)
_labels = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        n, text = marker.args
        _labels[n] = text
        _outcomes[n].append((item.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        failed = [nodeid for nodeid, outcome in _outcomes[n] if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {n:>2}: {_labels[n]}")
        for nodeid in failed:
            terminalreporter.write_line(f"         failing: {nodeid}")
