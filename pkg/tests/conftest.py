import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """Store one acceptance line; the test still asserts on its own."""
    def _record(criterion: int, name: str, passed: bool, detail: str = ""):
        ACCEPTANCE[criterion] = (name, bool(passed), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:>2}. {name}: {detail}")
