"""Seeded synthetic datasets: the 2-D toy set and schema replicas of the UCI tables.

The replicas only mimic column names, rough marginal scales and group shares
of the real datasets; they exist so the pipeline can run without downloads.
"""

from __future__ import annotations

import numpy as np

from .core import Dataset, GroupAssignment

CENSUS_FEATURES = ("age", "education-num", "final-weight", "capital-gain", "hours-per-week")
BANK_FEATURES = ("age", "balance", "duration")
CREDITCARD_FEATURES = (
    "age",
    *(f"bill-amt{i}" for i in range(1, 7)),
    "limit-bal",
    *(f"pay-amt{i}" for i in range(1, 7)),
)


def _labels(rng, n, names, shares):
    counts = np.floor(np.asarray(shares) * n).astype(int)
    counts[np.argmax(shares)] += n - counts.sum()
    labels = np.repeat(np.arange(len(names)), counts)
    rng.shuffle(labels)
    return [names[i] for i in labels]


def toy(n: int = 25, n_first: int = 14, seed: int = 7) -> tuple[Dataset, GroupAssignment]:
    """Uniform points in ``[0, 250]^2`` with two groups of sizes ``n_first`` and ``n - n_first``."""
    rng = np.random.default_rng(seed)
    pts = np.round(rng.uniform(0, 250, size=(n, 2)), 3)
    labels = np.array(["o"] * n_first + ["x"] * (n - n_first))
    rng.shuffle(labels)
    return Dataset(pts), GroupAssignment.from_labels(labels.tolist())


def census_like(n: int = 1000, seed: int = 0) -> tuple[np.ndarray, list[str]]:
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(38, 13, n)), 17, 90)
    edu = np.clip(np.round(rng.normal(10, 2.5, n)), 1, 16)
    fnl = np.round(rng.lognormal(12.0, 0.5, n))
    gain = np.where(rng.random(n) < 0.08, np.round(rng.lognormal(8.5, 1.0, n)), 0.0)
    hours = np.clip(np.round(rng.normal(40, 12, n)), 1, 99)
    feats = np.column_stack([age, edu, fnl, gain, hours])
    return feats, _labels(rng, n, ["Male", "Female"], [0.376, 0.624])


def bank_like(n: int = 1000, seed: int = 0) -> tuple[np.ndarray, list[str]]:
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(41, 10, n)), 18, 95)
    bal = np.round(rng.standard_t(3, n) * 1500 + 1300)
    dur = np.round(rng.exponential(250, n))
    feats = np.column_stack([age, bal, dur])
    return feats, _labels(rng, n, ["married", "single", "divorced"], [0.334, 0.334, 0.332])


def creditcard_like(n: int = 1000, seed: int = 0) -> tuple[np.ndarray, list[str]]:
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(35, 9, n)), 21, 79)
    limit = np.round(rng.lognormal(11.8, 0.8, n), -4)
    bills = np.round(limit[:, None] * rng.uniform(0, 0.9, (n, 6)))
    pays = np.round(bills * rng.uniform(0, 0.2, (n, 6)))
    feats = np.column_stack([age, bills, limit, pays])
    names = ["graduate school", "university", "high school", "others"]
    return feats, _labels(rng, n, names, [0.25, 0.25, 0.378, 0.122])


REPLICAS = {
    "census": (census_like, CENSUS_FEATURES, "sex"),
    "bank": (bank_like, BANK_FEATURES, "marital"),
    "creditcard": (creditcard_like, CREDITCARD_FEATURES, "education"),
}
