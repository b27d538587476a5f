import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "ran": False, "details": []})
    if report.when == "call" or report.failed:
        entry["ran"] = True
        entry["passed"] &= report.passed
        entry["details"] += [f"{k}={v}" for k, v in item.user_properties]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        status = "PASS" if e["ran"] and e["passed"] else "FAIL"
        detail = f"  [{'; '.join(e['details'])}]" if e["details"] else ""
        terminalreporter.write_line(f"criterion {number:>2} {status}: {e['title']}{detail}")
