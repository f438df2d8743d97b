import numpy as np
import pytest

from gatebudget.gates import REGISTRY
from gatebudget.numkernel import random_source

ACCEPTANCE_LINES: list[str] = []

PI = np.pi


@pytest.fixture
def rng():
    return random_source(20240611)


@pytest.fixture
def gates():
    return {k: v.copy() for k, v in REGISTRY.items()}


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(label: str, ok: bool, detail: str) -> None:
        line = f"{label}: {'PASS' if ok else 'FAIL'} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][3:].rstrip(":"))):
            terminalreporter.write_line(line)
