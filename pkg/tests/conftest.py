import numpy as np
import pytest

from roadprio.geometry import Road


@pytest.fixture
def straight_road():
    return Road.from_xy("S", [(float(i), 0.0) for i in range(60)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_criteria = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome; a summary is printed at the end."""
    def record(number, title, ok, detail=""):
        _criteria[number] = (title, bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok, detail = _criteria[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
