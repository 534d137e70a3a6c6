import re

ACCEPTANCE = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed:
        prev = ACCEPTANCE.get(key, True)
        ACCEPTANCE[key] = prev and report.passed if report.when == "call" else False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name.replace('_', ' ')}: {'PASS' if ok else 'FAIL'}")
