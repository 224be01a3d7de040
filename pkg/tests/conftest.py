from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from kstab import CurveData, IntersectionLattice, blowup, trivial_model

settings.register_profile(
    "kstab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("kstab")

ACCEPTANCE_LINES: list = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def blp2():
    """P^2 blown up at a point: basis H, E."""
    return IntersectionLattice(
        labels=["H", "E"],
        form=[[1, 0], [0, -1]],
        test_curves=[("E", [0, 1]), ("H-E", [1, -1])],
    )


@pytest.fixture
def m1():
    return blowup(trivial_model(CurveData(0, Fraction(2))), ["E0", "H_x"], "E1")
