import numpy as np
import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one acceptance line, then assert it."""

    def record(criterion: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((criterion, bool(ok), detail))
        assert ok, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {criterion}  {detail}")


@pytest.fixture
def table1():
    counts = np.zeros((6, 12))
    for j, k in enumerate(range(5, 11)):
        counts[j, 2 * j] = k
        counts[j, 2 * j + 1] = 10 - k
    return counts
