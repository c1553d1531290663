import numpy as np
import pytest

from arnsp.array_model import ArrayGeometry, Convention

THETA_B = np.deg2rad(45.0)
THETA_E = np.deg2rad(-30.0)


@pytest.fixture
def up16():
    return ArrayGeometry(16, 0.5, Convention.UPLINK_SIN)


@pytest.fixture
def dl16():
    return ArrayGeometry(16, 0.5, Convention.DOWNLINK_COS_CENTERED)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(key: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
