import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def measured(request):
    """Dict of observed values echoed on the criterion's summary line."""
    values = {}
    request.node.measured = values
    return values


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (call.when == "call" and call.excinfo is not None)
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False, "values": {}})
    if report.when == "call":
        entry["ran"] = True
    entry["ok"] = entry["ok"] and not failed and not report.skipped
    entry["values"].update(getattr(item, "measured", {}))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        detail = ", ".join(f"{k}={_short(v)}" for k, v in e["values"].items())
        line = f"{status} criterion {number}: {e['title']}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
