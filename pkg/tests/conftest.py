import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DEEP = os.environ.get("JENSENLAB_DEEP") == "1"


def pytest_configure(config):
    config.addinivalue_line("markers", "deep: long runs, enabled with JENSENLAB_DEEP=1")


def pytest_collection_modifyitems(config, items):
    if DEEP:
        return
    skip = pytest.mark.skip(reason="long run; set JENSENLAB_DEEP=1")
    for item in items:
        if "deep" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    """Store one PASS/FAIL line for the acceptance summary and echo it."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}" + (f" | {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split("criterion")[1].split(":")[0].split()[0]), s)):
        terminalreporter.write_line(line)
