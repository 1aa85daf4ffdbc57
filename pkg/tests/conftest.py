import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        if report.passed:
            status = "PASS"
        elif report.skipped:
            status = "SKIP"
        else:
            status = "FAIL"
        prev = _criteria.get(number, (title, "PASS", 0.0))
        # one criterion may span several tests; any failure marks it failed
        worst = status if status != "PASS" or prev[1] == "PASS" else prev[1]
        _criteria[number] = (title, worst, prev[2] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, seconds = _criteria[number]
        terminalreporter.write_line(f"{status}  criterion {number:>2}  {title}  ({seconds:.2f}s)")
