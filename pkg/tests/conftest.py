import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not (report.when == "call" or report.failed or report.skipped):
        return
    key, title = marker.args
    entry = item.config.stash[_CRITERIA].setdefault(key, {"title": title, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and report.passed
    entry["details"].extend(value for name, value in report.user_properties if name == "detail")
    if report.failed and report.when == "call":
        entry["details"].append(f"{item.name} failed")


def pytest_terminal_summary(terminalreporter, config):
    criteria = config.stash[_CRITERIA]
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(criteria, key=lambda k: int(k[1:])):
        entry = criteria[key]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"{key:<4} {status}  {entry['title']}"
        if entry["details"]:
            line += "  [" + "; ".join(entry["details"]) + "]"
        terminalreporter.write_line(line)
