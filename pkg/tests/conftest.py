import functools

import pytest

from slowlight.config import load_scenario
from slowlight.pipeline import compute


@functools.lru_cache(maxsize=None)
def solved(name: str):
    """Full pipeline result for a shipped scenario, computed once per session."""
    return compute(load_scenario(name))


@pytest.fixture(scope="session")
def scenario():
    return solved


ACCEPTANCE_LINES: list[str] = []


class Verdicts:
    """Collects PASS/FAIL lines; :meth:`settle` fails the test if any item failed."""

    def __init__(self):
        self.failed = []

    def __call__(self, label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if not ok:
            self.failed.append(label)
        return ok

    def settle(self):
        assert not self.failed, f"failed: {self.failed}"


@pytest.fixture
def verdict():
    return Verdicts()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
