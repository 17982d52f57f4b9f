import re

_verdicts = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.outcome != "passed":
        _verdicts[key] = _verdicts.get(key, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(_verdicts.items()):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} ({name.replace('_', ' ')})")
