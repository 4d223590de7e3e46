from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> one-line verdict, filled by test_acceptance
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    def put(n: int, status: str, detail: str) -> None:
        line = f"criterion {n:2d}: {status} {detail}"
        ACCEPTANCE[n] = line
        print(line)

    return put


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
