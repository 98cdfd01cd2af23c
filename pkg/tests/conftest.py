"""Shared pytest wiring.

Acceptance tests register one PASS/FAIL line per criterion via
`record_acceptance`; the lines are printed immediately (visible with -s and
in failure output) and reprinted together in the terminal summary so a plain
`pytest -v` run always shows the per-criterion verdicts.
"""

import pytest

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line("  " + line)
