import numpy as np
import pytest

from netinvest.sp_graph import edge, parallel, path_tree, series


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def three_branch(k: int):
    """Two shortest branches of length k and one of length k+1."""
    return parallel(path_tree(k, "a"), path_tree(k, "b"), path_tree(k + 1, "c"))


@pytest.fixture
def diamond():
    # series(parallel(e1, e2), e3)
    return series(parallel(edge("e1"), edge("e2")), edge("e3"))


_ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def report_criterion():
    """Record one pass/fail line per acceptance criterion."""
    def record(number: int, ok: bool, text: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])
