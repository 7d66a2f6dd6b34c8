import re

import pytest

_CRITERIA: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "setup" and report.skipped:
        _CRITERIA[label] = "SKIP"
    elif report.when == "call":
        if report.skipped:
            _CRITERIA[label] = "SKIP"
        elif report.failed:
            _CRITERIA[label] = "FAIL"
        elif _CRITERIA.get(label) != "FAIL":
            _CRITERIA[label] = "PASS"
    elif report.failed:
        _CRITERIA[label] = "FAIL"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test checks")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")

    def key(label):
        m = re.match(r"(\d+)", label)
        return (int(m.group(1)) if m else 0, label)

    for label in sorted(_CRITERIA, key=key):
        terminalreporter.write_line(f"{_CRITERIA[label]:4s}  criterion {label}")
