import pytest

_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and report.passed:
        return
    name = marker.args[0]
    if report.failed or report.skipped:
        _criteria[name] = "FAIL" if report.failed else "SKIP"
    else:
        _criteria.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("-")[1])):
        terminalreporter.write_line(f"{name}: {_criteria[name]}")
