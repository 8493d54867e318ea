import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    num, title = mark.args
    entry = _results.setdefault(num, {"title": title, "ok": True, "seen": False})
    entry["seen"] = entry["seen"] or rep.when == "call"
    entry["ok"] = entry["ok"] and not rep.failed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        r = _results[num]
        verdict = "PASS" if r["ok"] and r["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  {r['title']}")
