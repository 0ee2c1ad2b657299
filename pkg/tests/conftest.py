import numpy as np
import pytest

from pjdetect.numerics import SeededRng


@pytest.fixture
def rng():
    return SeededRng(1234, 0)


def random_channel(gen: np.random.Generator, M: int, N: int) -> np.ndarray:
    return (gen.standard_normal((M, N)) + 1j * gen.standard_normal((M, N))) / np.sqrt(2)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(number: int, title: str, passed: bool, detail: str = "") -> bool:
        line = f"[acceptance {number}] {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
