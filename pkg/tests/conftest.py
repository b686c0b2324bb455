import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# filled by test_acceptance; printed once at the end of the run
CRITERIA_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA_RESULTS):
        ok, title = CRITERIA_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
