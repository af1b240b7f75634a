import pytest

ACCEPTANCE = {}


def record(number: int, ok: bool, detail: str) -> None:
    """Store and print one acceptance line; the terminal summary repeats them in order."""
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])


@pytest.fixture
def record_criterion():
    return record
