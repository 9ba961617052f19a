import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_AC_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        num, title = mark.args
        prev = _AC_RESULTS.get(num, (title, True))
        _AC_RESULTS[num] = (title, prev[1] and rep.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_AC_RESULTS):
        title, ok = _AC_RESULTS[num]
        terminalreporter.write_line(f"AC{num:<2} {'PASS' if ok else 'FAIL'}  {title}")
