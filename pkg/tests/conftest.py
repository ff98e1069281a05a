"""Per-criterion summary for tests marked ``@pytest.mark.criterion(n)``."""
from collections import defaultdict

_criteria = {}
_outcomes = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = int(m.args[0])


def pytest_runtest_logreport(report):
    n = _criteria.get(report.nodeid)
    if n is None:
        return
    if report.failed or (report.when == "call" and report.passed) or report.skipped:
        _outcomes[n].append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        failed = [name for name, outcome in results if outcome == "failed"]
        status = "FAIL" if failed else "PASS"
        passed = sum(outcome == "passed" for _, outcome in results)
        line = f"AC{n}: {status} ({passed}/{len(results)} checks passed)"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
