import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record the one-line verdict of an acceptance criterion."""
    def record(number: int, passed: bool, detail: str, seconds: float, limit: float | None):
        ok = passed and (limit is None or seconds < limit)
        budget = "" if limit is None else f" < {limit:g} s"
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}  [runtime {seconds:.3f} s{budget}]"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
