"""Shared fixtures and brute-force helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from fairhac.core import Dataset, GroupAssignment
from fairhac.hac import vanilla_hac

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_dataset(rng: np.random.Generator, n: int, m: int = 2, f: int = 2):
    """Continuous random points plus a group labelling that uses every group."""
    pts = rng.normal(size=(n, m))
    f = min(f, n)
    labels = np.concatenate([np.arange(f), rng.integers(0, f, n - f)])
    rng.shuffle(labels)
    return Dataset(pts), GroupAssignment(labels, f)


def appendix_toy():
    """The 16-leaf, four-group example tree: a balanced binary tree whose
    four 4-leaf clusters are each a single group."""
    i = np.arange(16)
    x = (i & 1) * 1.0 + ((i >> 1) & 1) * 4.0 + ((i >> 2) & 1) * 16.0 + ((i >> 3) & 1) * 64.0
    data = Dataset(x[:, None])
    groups = GroupAssignment(np.repeat(np.arange(4), 4), 4)
    return data, groups, vanilla_hac(data, "single")


@pytest.fixture
def toy16():
    return appendix_toy()
