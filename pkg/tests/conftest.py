import os

from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import time

_T0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _T0
    ok = elapsed < 20 * 60
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] suite runtime {elapsed:.0f}s (<1200s)")
