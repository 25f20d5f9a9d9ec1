import re

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion\[(\d+)\]")
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one acceptance criterion")


def pytest_runtest_logreport(report):
    match = _ACCEPTANCE.search(report.nodeid)
    if match and (report.when == "call" or report.outcome == "failed"):
        message = ""
        if report.failed:
            message = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") else ""
        _outcomes[int(match.group(1))] = (report.outcome, message.splitlines()[0] if message else "")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        outcome, message = _outcomes[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {n:2d} {status}  {CRITERIA[n]}"
        if status == "FAIL" and message:
            line += f"  ({message})"
        terminalreporter.write_line(line)
