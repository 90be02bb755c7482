import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_criteria: dict = {}


@pytest.fixture
def criterion(request):
    """Record a numbered acceptance criterion and report it at the end."""
    def record(number: int, passed: bool, detail: str) -> bool:
        _criteria[number] = (bool(passed), detail)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        passed, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
