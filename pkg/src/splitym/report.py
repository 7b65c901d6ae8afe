"""Check records, JSON reports and deterministic per-check random streams."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Optional

import numpy as np

SCHEMA = 1


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    fd_step: float = 1e-4
    quad_tol: float = 1e-5
    samples: int = 4096
    points: int = 100
    timing: bool = True

    def __post_init__(self):
        for name in ("fd_step", "quad_tol", "samples", "points"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class Record:
    suite: str
    check: str
    value: float
    expected: Optional[float]
    tolerance: float
    passed: bool
    runtime_ms: float = 0.0
    note: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "suite": self.suite,
            "check": self.check,
            "value": _num(self.value),
            "expected": _num(self.expected),
            "tolerance": _num(self.tolerance),
            "pass": bool(self.passed),
            "runtime_ms": _num(self.runtime_ms),
        }
        if self.note:
            out["note"] = self.note
        if self.extra:
            out.update(self.extra)
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else repr(x)


def stream(seed: int, suite: str, index: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, suite, index)``."""
    digest = hashlib.sha256(f"{seed}/{suite}/{index}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


class Recorder:
    """Collects records for one suite; each check gets its own random stream."""

    def __init__(self, suite: str, cfg: RunConfig):
        self.suite = suite
        self.cfg = cfg
        self.records: list[Record] = []

    def rng(self) -> np.random.Generator:
        return stream(self.cfg.seed, self.suite, len(self.records))

    def _add(self, check, value, expected, tol, passed, t0, note=None, **extra) -> Record:
        ms = (time.perf_counter() - t0) * 1e3 if self.cfg.timing else 0.0
        rec = Record(self.suite, check, float(value), expected, float(tol), bool(passed), ms, note, extra)
        self.records.append(rec)
        return rec

    def close(self, check: str, fn: Callable[[np.random.Generator], float], expected: float, tol: float,
              note: str | None = None, **extra) -> Record:
        """Pass when ``|value - expected| <= tol``."""
        t0 = time.perf_counter()
        value = float(fn(self.rng()))
        return self._add(check, value, expected, tol, abs(value - expected) <= tol, t0, note, **extra)

    def below(self, check, fn, tol, note=None, **extra) -> Record:
        """Residual check: expected 0, pass when ``|value| <= tol``."""
        return self.close(check, fn, 0.0, tol, note, **extra)

    def above(self, check, fn, threshold, note=None, **extra) -> Record:
        """Pass when ``value > threshold``; no expected value."""
        t0 = time.perf_counter()
        value = float(fn(self.rng()))
        return self._add(check, value, None, threshold, value > threshold, t0, note, **extra)

    def truth(self, check, fn, note=None, **extra) -> Record:
        """Boolean check reported as 1/0 with expected 1."""
        t0 = time.perf_counter()
        value = 1.0 if fn(self.rng()) else 0.0
        return self._add(check, value, 1.0, 0.0, value == 1.0, t0, note, **extra)


def build_report(records: list[Record], cfg: RunConfig, **meta: Any) -> dict:
    config = asdict(cfg)
    return {
        "schema": SCHEMA,
        "records": [r.to_json() for r in records],
        "metadata": {"seed": cfg.seed, "config": config, **meta},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
