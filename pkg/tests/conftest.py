import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def record():
    """Store a one-line pass/fail summary for an acceptance criterion."""

    def _record(key: str, passed: bool, detail: str):
        ACCEPTANCE_LINES[key] = f"{key}: {'PASS' if passed else 'FAIL'} - {detail}"
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
