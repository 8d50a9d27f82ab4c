import pytest

ACCEPTANCE = {}


def record(n, ok, detail, seconds):
    ACCEPTANCE[n] = (bool(ok), detail, seconds)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail, sec = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({sec:6.1f}s): {detail}")
