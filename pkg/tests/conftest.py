import pytest

CRITERION_LINES = {}


@pytest.fixture
def criterion_log():
    return CRITERION_LINES


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERION_LINES):
        terminalreporter.write_line(CRITERION_LINES[cid])
