"""Dataset ingestion: LIBSVM/CSV parsing, min-max scaling and splitting."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import LabeledSet, UnlabeledSet


class ParseError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True, eq=False)
class RawDataset:
    X: np.ndarray
    labels: tuple
    feature_names: Optional[tuple] = None

    def __len__(self):
        return len(self.labels)


def _parse_label(token):
    try:
        value = float(token)
    except ValueError:
        return token
    return int(value) if value.is_integer() else value


def parse_libsvm(text: str) -> RawDataset:
    rows, labels = [], []
    dim = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        labels.append(_parse_label(parts[0]))
        entries = {}
        prev = 0
        for item in parts[1:]:
            idx, sep, val = item.partition(":")
            if not sep:
                raise ParseError(f"malformed feature {item!r}", lineno)
            try:
                i, v = int(idx), float(val)
            except ValueError:
                raise ParseError(f"malformed feature {item!r}", lineno) from None
            if i < 1:
                raise ParseError(f"feature index {i} is not 1-based", lineno)
            if i <= prev:
                raise ParseError(f"feature indices not ascending at {i}", lineno)
            if np.isnan(v):
                raise ParseError("NaN feature value", lineno)
            entries[i] = v
            prev = i
        dim = max(dim, prev)
        rows.append(entries)
    X = np.zeros((len(rows), dim))
    for r, entries in enumerate(rows):
        for i, v in entries.items():
            X[r, i - 1] = v
    return RawDataset(X, tuple(labels))


def serialize_libsvm(dataset: RawDataset) -> str:
    lines = []
    for row, label in zip(dataset.X, dataset.labels):
        label_text = f"{label:+d}" if isinstance(label, (int, np.integer)) else str(label)
        feats = [f"{i + 1}:{v!r}" for i, v in enumerate(row.tolist()) if v != 0]
        lines.append(" ".join([label_text] + feats))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_csv(text: str, label_column) -> RawDataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header:
        raise ParseError("missing header row", 1)
    if isinstance(label_column, int):
        li = label_column if label_column >= 0 else len(header) + label_column
    else:
        if label_column not in header:
            raise ParseError(f"label column {label_column!r} not in header", 1)
        li = header.index(label_column)
    names = tuple(h for j, h in enumerate(header) if j != li)
    rows, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, got {len(row)}", lineno)
        if any(cell.strip() == "" for cell in row):
            raise ParseError("missing cell", lineno)
        labels.append(_parse_label(row[li].strip()))
        try:
            values = [float(c) for j, c in enumerate(row) if j != li]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if any(np.isnan(values)):
            raise ParseError("NaN feature value", lineno)
        rows.append(values)
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return RawDataset(X, tuple(labels), names)


@dataclass(frozen=True, eq=False)
class MinMax:
    low: np.ndarray
    high: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.high - self.low
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (X - self.low) / safe, 0.0)
        return np.clip(out, 0.0, 1.0)


def normalize_minmax(dataset: RawDataset):
    """Return (scaled dataset, transform); constant features map to 0."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    transform = MinMax(dataset.X.min(axis=0), dataset.X.max(axis=0))
    return RawDataset(transform.apply(dataset.X), dataset.labels, dataset.feature_names), transform


def parity_label_map(labels) -> dict:
    """Even -> -1, odd -> +1."""
    return {lab: (1 if int(lab) % 2 else -1) for lab in set(labels)}


def binary_label_map(labels) -> dict:
    """Two observed labels: the smaller maps to -1, the larger to +1."""
    uniq = sorted(set(labels), key=lambda v: (str(type(v)), v))
    if len(uniq) != 2:
        raise ValueError(f"expected two distinct labels, found {len(uniq)}")
    return {uniq[0]: -1, uniq[1]: 1}


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.6, 0.2, 0.2)
    seed: int = 0
    label_map: Optional[dict] = field(default=None, hash=False)

    def __post_init__(self):
        f = tuple(float(v) for v in self.fractions)
        if len(f) != 3 or any(v <= 0 for v in f) or abs(sum(f) - 1.0) > 1e-9:
            raise ValueError("fractions must be three positive numbers summing to 1")
        object.__setattr__(self, "fractions", f)


@dataclass(frozen=True, eq=False)
class Split:
    labeled: LabeledSet
    unlabeled: UnlabeledSet
    test: LabeledSet
    parts: np.ndarray  # part id per original row: 0 labeled, 1 unlabeled, 2 test

    def manifest_csv(self) -> str:
        names = ("labeled", "unlabeled", "test")
        lines = ["row,part"] + [f"{i},{names[p]}" for i, p in enumerate(self.parts)]
        return "\n".join(lines) + "\n"


def split(dataset: RawDataset, spec: SplitSpec = SplitSpec()) -> Split:
    n = len(dataset)
    label_map = spec.label_map or binary_label_map(dataset.labels)
    missing = set(dataset.labels) - set(label_map)
    if missing:
        raise ValueError(f"label map does not cover {sorted(map(str, missing))}")
    y = np.array([label_map[lab] for lab in dataset.labels], dtype=int)
    perm = np.random.default_rng([spec.seed, 21]).permutation(n)
    a = int(round(spec.fractions[0] * n))
    b = a + int(round(spec.fractions[1] * n))
    pieces = perm[:a], perm[a:b], perm[b:]
    if any(len(p) == 0 for p in pieces):
        raise ValueError("a split part is empty")
    parts = np.empty(n, dtype=int)
    for pid, idx in enumerate(pieces):
        parts[idx] = pid
    X = dataset.X
    return Split(LabeledSet(X[pieces[0]], y[pieces[0]]), UnlabeledSet(X[pieces[1]]),
                 LabeledSet(X[pieces[2]], y[pieces[2]]), parts)


def load_dataset(path: str, label_column=None) -> RawDataset:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".csv"):
        return parse_csv(text, -1 if label_column is None else label_column)
    return parse_libsvm(text)
