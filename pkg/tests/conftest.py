import json
from pathlib import Path

import pytest

ORACLES = Path(__file__).resolve().parent / "oracles"


def load_oracle(name):
    return json.loads((ORACLES / name).read_text())


@pytest.fixture(scope="session")
def bfs_oracle():
    return load_oracle("bfs_distances.json")


@pytest.fixture(scope="session")
def sipps_oracle():
    return load_oracle("sipps_bruteforce.json")


@pytest.fixture(scope="session")
def walk_oracle():
    return load_oracle("single_agent_walk.json")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def emit(criterion, ok, detail):
        line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
