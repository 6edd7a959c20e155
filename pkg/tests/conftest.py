import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    key = int(match.group(1))
    failed = report.failed or (report.when == "call" and report.outcome == "skipped")
    if failed or key not in _outcomes:
        _outcomes[key] = "FAIL" if failed else _outcomes.get(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {key}: {_outcomes[key]}")
