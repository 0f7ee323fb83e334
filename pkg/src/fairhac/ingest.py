"""CSV loading, sensitive-attribute encoding, seeded subsampling and dataset configs."""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset, FairHACError, GroupAssignment, InvalidGroupError

CONFIG_DIR = Path(__file__).with_name("configs")


class IngestError(FairHACError):
    pass


def load_csv(path, feature_columns: Sequence[str], sensitive_column: str) -> tuple[Dataset, GroupAssignment]:
    """Read features and the sensitive attribute from a headed, comma-separated UTF-8 file.

    Groups are numbered in order of first appearance of each sensitive value.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in [*feature_columns, sensitive_column] if c not in header]
        if missing:
            raise IngestError(f"{path}: missing columns {missing}")
        cols = [header.index(c) for c in feature_columns]
        scol = header.index(sensitive_column)
        rows, labels = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise IngestError(f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}")
            values = []
            for c, name in zip(cols, feature_columns):
                cell = record[c].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestError(f"{path}:{lineno}: column {name!r}: cannot parse {cell!r}") from None
                if not math.isfinite(v):
                    raise IngestError(f"{path}:{lineno}: column {name!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
            labels.append(record[scol].strip())
    if not rows:
        raise IngestError(f"{path}: no data rows")
    points = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_columns))
    return Dataset(points), GroupAssignment.from_labels(labels)


def write_csv(path, dataset: Dataset, groups: GroupAssignment, feature_columns: Sequence[str],
              sensitive_column: str) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*feature_columns, sensitive_column])
        for row, g in zip(dataset.points.tolist(), groups.group_of.tolist()):
            writer.writerow([repr(v) for v in row] + [groups.group_names[g]])


def subsample(dataset: Dataset, groups: GroupAssignment, target_n: int, seed: int,
              max_retries: int = 100) -> tuple[Dataset, GroupAssignment, int]:
    """Uniform sample without replacement, rows kept in their original order.

    Indices come from ``random.Random(seed).sample(range(n), target_n)`` (the
    stdlib Mersenne Twister), so a seed gives the same rows on every platform. If
    a protected group ends up empty the seed is incremented, at most
    ``max_retries`` times. Returns the sample and the seed actually used.
    """
    n = dataset.n
    if not 1 <= target_n <= n:
        raise IngestError(f"target_n={target_n} outside [1, {n}]")
    if target_n == n:
        return dataset, groups, seed
    for attempt in range(max_retries + 1):
        used = seed + attempt
        rows = sorted(random.Random(used).sample(range(n), target_n))
        try:
            sub_groups = groups.take(rows)
        except InvalidGroupError:
            continue
        return dataset.take(rows), sub_groups, used
    raise IngestError(f"no subsample of size {target_n} keeps all {groups.f} groups after {max_retries} retries")


def standardize(dataset: Dataset) -> Dataset:
    """Per-feature z-score with population variance; constant features become 0."""
    pts = dataset.points
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    scaled = np.where(std > 0, (pts - mean) / np.where(std > 0, std, 1.0), 0.0)
    return Dataset(scaled, dataset.ids)


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    path: Path
    features: tuple[str, ...]
    sensitive: str
    target_n: int | None = None
    seed: int = 0
    k: int = 4
    standardize: bool = False

    @classmethod
    def load(cls, path) -> "DatasetConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"cannot read config {path}: {exc}") from exc
        try:
            data_path = Path(raw["path"])
            if not data_path.is_absolute():
                data_path = path.parent / data_path
            return cls(
                name=raw.get("name", path.stem),
                path=data_path,
                features=tuple(raw["features"]),
                sensitive=raw["sensitive"],
                target_n=raw.get("target_n"),
                seed=int(raw.get("seed", 0)),
                k=int(raw.get("k", 4)),
                standardize=bool(raw.get("standardize", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IngestError(f"invalid config {path}: {exc}") from exc

    def with_path(self, path) -> "DatasetConfig":
        return DatasetConfig(self.name, Path(path), self.features, self.sensitive, self.target_n,
                             self.seed, self.k, self.standardize)

    def materialize(self) -> tuple[Dataset, GroupAssignment]:
        """Load, subsample and optionally standardize as the config describes."""
        dataset, groups = load_csv(self.path, self.features, self.sensitive)
        if self.target_n is not None and self.target_n < dataset.n:
            dataset, groups, _ = subsample(dataset, groups, self.target_n, self.seed)
        if self.standardize:
            dataset = standardize(dataset)
        return dataset, groups


def bundled_config(name: str) -> DatasetConfig:
    """One of the shipped configs: ``census``, ``bank``, ``creditcard`` or ``toy``."""
    path = CONFIG_DIR / f"{name}.json"
    if not path.exists():
        raise IngestError(f"no bundled config named {name!r}")
    return DatasetConfig.load(path)
