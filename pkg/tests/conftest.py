from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

_LINES = pytest.StashKey[dict]()


class CriterionRecorder:
    """Records one pass/fail line per acceptance criterion."""

    def __init__(self, store: dict):
        self.store = store

    @contextmanager
    def __call__(self, number: int, title: str):
        t0 = time.perf_counter()
        notes: dict = {}
        try:
            yield notes
        except BaseException:
            self.store[number] = self._line("FAIL", number, title, t0, notes)
            raise
        self.store[number] = self._line("PASS", number, title, t0, notes)

    @staticmethod
    def _line(verdict, number, title, t0, notes):
        extra = "".join(f", {k}={v}" for k, v in notes.items())
        return f"{verdict} criterion {number}: {title} ({time.perf_counter() - t0:.1f}s{extra})"


@pytest.fixture(scope="session")
def criterion(pytestconfig):
    return CriterionRecorder(pytestconfig.stash.setdefault(_LINES, {}))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
