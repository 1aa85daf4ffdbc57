"""Datasets and their on-disk formats.

A dataset is a feature matrix ``X`` of shape ``(m, n)`` whose *columns* are
samples, the ground-truth class of every sample, and the length ``l`` of the
labeled prefix: samples ``0 .. l-1`` are the ones whose labels an algorithm
may look at.

CSV layout (``format="csv"``)::

    a,a,b,b          <- header: one class label per sample
    0.1,0.2,0.9,1.0  <- feature 0
    0.3,0.1,0.7,0.8  <- feature 1

so a file with ``m`` data rows and ``n`` columns loads as an ``m x n`` matrix.
Images or any other raw source must be converted to this layout externally.

Binary layout (``format="dense-binary"``) is a ``.npz`` archive holding
``X`` (float64), ``labels`` (str) and ``n_labeled``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""

    code = "data"


class EmptyFileError(DataError):
    code = "empty"


class RaggedRowsError(DataError):
    code = "ragged"


class NonFiniteError(DataError):
    code = "non-finite"


@dataclass
class DataSet:
    X: np.ndarray
    labels: np.ndarray | None = None
    n_labeled: int = 0
    name: str = "dataset"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {self.X.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (self.n,):
                raise DataError(
                    f"expected {self.n} labels, got {self.labels.shape[0]}")
        if not 0 <= self.n_labeled <= (0 if self.labels is None else self.n):
            raise DataError(f"invalid labeled prefix length {self.n_labeled}")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def class_count(self) -> int:
        return 0 if self.labels is None else len(np.unique(self.labels))

    @property
    def labeled_labels(self) -> np.ndarray:
        if self.labels is None:
            return np.empty(0)
        return self.labels[: self.n_labeled]

    def label_codes(self) -> np.ndarray:
        """Ground-truth labels as integers ``0..C-1`` (sorted label order)."""
        _, codes = np.unique(self.labels, return_inverse=True)
        return codes.ravel()


def normalize(dataset: DataSet) -> DataSet:
    """Scale features by the global maximum, ``X / max(X)``."""
    peak = dataset.X.max()
    if peak <= 0:
        raise DataError("cannot normalize: max(X) <= 0")
    return DataSet(dataset.X / peak, dataset.labels, dataset.n_labeled,
                   dataset.name, dict(dataset.meta))


def _check_finite(X: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        i, j = bad[0]
        raise NonFiniteError(f"non-finite entry at ({i},{j})")


def load_dataset(path, format: str = "csv", name: str | None = None) -> DataSet:
    """Read a dataset; every sample is treated as labeled ground truth.

    The returned ``n_labeled`` is the full sample count; trial sampling
    decides which labels an algorithm actually sees.
    """
    path = Path(path)
    name = name or path.stem
    if format == "dense-binary":
        with np.load(path, allow_pickle=False) as archive:
            X = archive["X"]
            labels = archive["labels"]
            n_labeled = int(archive["n_labeled"])
        if X.size == 0:
            raise EmptyFileError(f"{path}: no data")
        _check_finite(X)
        return DataSet(X, labels, n_labeled, name)
    if format != "csv":
        raise DataError(f"unknown dataset format {format!r}")

    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise EmptyFileError(f"{path}: need a header and at least one row")
    header, body = rows[0], rows[1:]
    n = len(header)
    for lineno, row in enumerate(body, start=2):
        if len(row) != n:
            raise RaggedRowsError(
                f"{path}: row {lineno} has {len(row)} fields, expected {n}")
    try:
        X = np.array([[float(v) for v in row] for row in body], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    _check_finite(X)
    labels = np.array([h.strip() for h in header])
    return DataSet(X, labels, n, name)


def save_dataset(dataset: DataSet, path, format: str = "csv") -> None:
    path = Path(path)
    if format == "dense-binary":
        with open(path, "wb") as fh:
            np.savez(fh, X=dataset.X, labels=dataset.labels.astype(str),
                     n_labeled=dataset.n_labeled)
        return
    if format != "csv":
        raise DataError(f"unknown dataset format {format!r}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([str(v) for v in dataset.labels])
        for row in dataset.X:
            writer.writerow([repr(float(v)) for v in row])
