from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def specfun_ref():
    return json.loads((DATA / "specfun_ref.json").read_text())


@pytest.fixture(scope="session")
def kernel_ref():
    return json.loads((DATA / "kernel_ref.json").read_text())


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Print and record one acceptance line, then assert it."""

    def report(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        _CRITERIA.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
