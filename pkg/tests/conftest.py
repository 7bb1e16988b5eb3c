import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def goldens():
    return json.loads((DATA / "goldens.json").read_text())


@pytest.fixture(scope="session")
def converged():
    return json.loads((DATA / "converged.json").read_text())


CRITERIA_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_log():
    return CRITERIA_LINES


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
