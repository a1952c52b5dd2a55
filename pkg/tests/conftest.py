import sys
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent.parent / "data"

sys.path.insert(0, str(Path(__file__).resolve().parent))

_outcomes: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        state = "xfailed" if hasattr(report, "wasxfail") else report.outcome
        _outcomes.setdefault(marker.args[0], []).append((item.name, state))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        ok = all(o == "passed" for _, o in results)
        failed = [f"{name} [{o}]" for name, o in results if o != "passed"]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({len(results)} check(s))"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
