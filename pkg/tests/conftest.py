import numpy as np
import pytest

from adaptive_mt import PValueSample, RngStream


@pytest.fixture
def stream():
    return RngStream(20240501)


def uniform_sample(m, seed=0):
    return PValueSample(np.random.default_rng(seed).uniform(size=m))


ACCEPTANCE_LINES: list = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
