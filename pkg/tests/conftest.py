import time
from contextlib import contextmanager

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Time a block against a runtime limit and log one PASS/FAIL line."""

    @contextmanager
    def run(number, title, limit):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            status = "PASS" if ok and elapsed < limit else "FAIL"
            line = f"{status} criterion {number}: {title} ({elapsed:.2f}s, limit {limit}s)"
            ACCEPTANCE_LINES.append(line)
            print(line)
        assert elapsed < limit, f"criterion {number} took {elapsed:.2f}s (limit {limit}s)"

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
