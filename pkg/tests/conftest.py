import pytest

CRITERIA = {}


@pytest.fixture
def record_criterion():
    """Store a one-line verdict for the terminal summary and echo it."""
    def record(number: int, name: str, passed: bool, detail: str):
        line = f"criterion {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
        CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
