import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trustdyn import TABLE1, Event  # noqa: E402


@pytest.fixture
def table1():
    return TABLE1


@pytest.fixture
def mixed_schedule():
    return [Event.TRUE_ALARM, Event.MISS, Event.FALSE_ALARM] * 4


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
