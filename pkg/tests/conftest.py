from __future__ import annotations

from dataclasses import dataclass, field

import pytest

ACCEPTANCE = pytest.StashKey[dict]()


@dataclass
class Criterion:
    number: int
    title: str
    checks: list = field(default_factory=list)

    def check(self, label: str, value: float, bound: str, passed: bool) -> bool:
        self.checks.append((label, value, bound, bool(passed)))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c[3] for c in self.checks)


class AcceptanceLog:
    def __init__(self, store: dict):
        self.store = store

    def criterion(self, number: int, title: str) -> Criterion:
        return self.store.setdefault(number, Criterion(number, title))


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture(scope="session")
def acceptance(request) -> AcceptanceLog:
    return AcceptanceLog(request.config.stash[ACCEPTANCE])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE, {})
    if not store:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(store):
        c = store[number]
        tr.write_line(f"[{'PASS' if c.passed else 'FAIL'}] criterion {number}: {c.title}")
        for label, value, bound, ok in c.checks:
            tr.write_line(f"    {'ok ' if ok else 'BAD'} {label}: {value:.6g} ({bound})")
