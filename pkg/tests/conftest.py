import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import mpnum  # noqa: E402
from mpnum import _backend  # noqa: E402

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[num] = (m.group(2).replace("_", " "), report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, outcome, dur = _CRITERIA[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2} [{verdict}] {name} ({dur:.2f} s)")


@pytest.fixture
def backend():
    """Restore the active backend and thread count after a test."""
    prev, threads = _backend.backend_name(), _backend.get_num_threads()
    yield _backend
    _backend.use_backend(prev)
    _backend.set_num_threads(threads)


needs_compiled = pytest.mark.skipif(
    "compiled" not in _backend.available(), reason="compiled extension not built"
)
