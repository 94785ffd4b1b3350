import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

sys.path.insert(0, str(Path(__file__).resolve().parent))

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "ran": False, "notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["ran"] = True
        if hasattr(report, "wasxfail"):
            entry["passed"] = False
            entry["notes"].append(f"expected failure: {report.wasxfail}")
        elif report.outcome != "passed":
            entry["passed"] = False
    for name, text in item.user_properties:
        if name == "detail" and report.when == "call" and text not in entry["notes"]:
            entry["notes"].append(text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"    {note}")
