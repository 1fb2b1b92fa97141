"""Domain types, CSV ingestion, deterministic splitting, and perturbation application.

A dataset is a dense (n, d) float matrix with integer class labels and stable
per-row ids. Feature kind is either Binary (all values in {0, 1}) or
Continuous (values within per-feature bounds). All types are immutable after
construction and safe to share across workers.
"""

import csv
import math
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    EmptyDataset,
    InvalidFractions,
    InvalidLabel,
    MissingFile,
    NonNumericCell,
    RaggedRows,
    ShapeMismatch,
    UnknownLabelColumn,
)
from .rng import rng_for


class FeatureKind(Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Sample:
    """One feature vector with a stable non-negative id."""

    id: int
    features: np.ndarray

    @property
    def d(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class PerturbationRecord:
    """The perturbed feature indices and deltas for one attacked sample.

    ``n_perturbed`` is the record's perturbation count; metrics divide by it,
    so callers must skip records with zero perturbations.
    """

    sample_id: int
    perturbed_indices: np.ndarray  # int64, distinct, each < d
    deltas: np.ndarray  # float64, aligned with perturbed_indices
    evasive: bool
    original_label: int
    adversarial_label: int

    def __post_init__(self):
        idx = np.asarray(self.perturbed_indices, dtype=np.int64)
        dl = np.asarray(self.deltas, dtype=np.float64)
        object.__setattr__(self, "perturbed_indices", idx)
        object.__setattr__(self, "deltas", dl)
        if idx.shape != dl.shape:
            raise ShapeMismatch("perturbed_indices and deltas differ in length")
        if idx.size and len(np.unique(idx)) != idx.size:
            raise InvalidLabel("perturbed indices must be distinct")
        if self.evasive and self.adversarial_label == self.original_label:
            raise InvalidLabel("evasive record with unchanged label")

    @property
    def n_perturbed(self) -> int:
        return int(self.perturbed_indices.size)

    def to_dict(self) -> dict:
        return {
            "sample_id": int(self.sample_id),
            "perturbed_indices": [int(j) for j in self.perturbed_indices],
            "deltas": [float(v) for v in self.deltas],
            "evasive": bool(self.evasive),
            "original_label": int(self.original_label),
            "adversarial_label": int(self.adversarial_label),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PerturbationRecord":
        return cls(
            sample_id=int(obj["sample_id"]),
            perturbed_indices=np.asarray(obj["perturbed_indices"], dtype=np.int64),
            deltas=np.asarray(obj["deltas"], dtype=np.float64),
            evasive=bool(obj["evasive"]),
            original_label=int(obj["original_label"]),
            adversarial_label=int(obj["adversarial_label"]),
        )


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus labels, class count, feature kind, and bounds."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    ids: np.ndarray  # (n,) int64
    k: int
    feature_kind: FeatureKind
    feature_bounds: np.ndarray  # (d, 2) [lo, hi]
    feature_names: tuple = field(default=())

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int64)
        ids = np.asarray(self.ids, dtype=np.int64)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "ids", ids)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ShapeMismatch("features must be a (n, d) matrix with d >= 1")
        if not (len(X) == len(y) == len(ids)):
            raise ShapeMismatch("features, labels, and ids must have equal length")
        if not np.all(np.isfinite(X)):
            raise NonNumericCell(int(np.argwhere(~np.isfinite(X))[0][0]), int(np.argwhere(~np.isfinite(X))[0][1]), "non-finite")
        if y.size and (y.min() < 0 or y.max() >= self.k):
            raise InvalidLabel(f"labels must lie in [0, {self.k})")
        bounds = np.asarray(self.feature_bounds, dtype=np.float64)
        if bounds.shape != (X.shape[1], 2):
            raise ShapeMismatch("feature_bounds must have shape (d, 2)")
        object.__setattr__(self, "feature_bounds", bounds)
        if self.feature_kind is FeatureKind.BINARY:
            if X.size and not np.all((X == 0.0) | (X == 1.0)):
                raise InvalidLabel("binary dataset contains values outside {0, 1}")
        else:
            if X.size and (np.any(X < bounds[:, 0] - 1e-12) or np.any(X > bounds[:, 1] + 1e-12)):
                raise InvalidLabel("continuous dataset has values outside feature_bounds")
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{j}" for j in range(X.shape[1])))

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def sample(self, i: int) -> Sample:
        """Sample at positional index i (not by id)."""
        return Sample(id=int(self.ids[i]), features=self.features[i])

    def sample_by_id(self, sid: int) -> Sample:
        pos = np.flatnonzero(self.ids == sid)
        if pos.size == 0:
            raise EmptyDataset(f"no sample with id {sid}")
        return self.sample(int(pos[0]))

    def subset(self, positions) -> "LabeledDataset":
        positions = np.asarray(positions, dtype=np.int64)
        return LabeledDataset(
            features=self.features[positions],
            labels=self.labels[positions],
            ids=self.ids[positions],
            k=self.k,
            feature_kind=self.feature_kind,
            feature_bounds=self.feature_bounds,
            feature_names=self.feature_names,
        )


def _infer_kind(X: np.ndarray) -> FeatureKind:
    if np.all((X == 0.0) | (X == 1.0)):
        return FeatureKind.BINARY
    return FeatureKind.CONTINUOUS


def _bounds_for(X: np.ndarray, kind: FeatureKind) -> np.ndarray:
    if kind is FeatureKind.BINARY:
        b = np.zeros((X.shape[1], 2))
        b[:, 1] = 1.0
        return b
    return np.stack([X.min(axis=0), X.max(axis=0)], axis=1)


def load_dataset_csv(path, label_column: str = "label", feature_kind: str = "auto") -> LabeledDataset:
    """Load a dataset from a headered CSV file.

    All non-label columns are features, in file order. The label column must
    hold integer class indices; k is inferred as max label + 1. feature_kind
    may be "auto", "binary", or "continuous" (auto infers Binary iff every
    value is 0 or 1).
    """
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"empty file: {path}") from None
        if label_column not in header:
            raise UnknownLabelColumn(label_column, header)
        label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]
        if not names:
            raise ShapeMismatch("dataset has no feature columns")
        rows, labels = [], []
        for rnum, row in enumerate(reader):
            if len(row) != len(header):
                raise RaggedRows(rnum, len(header), len(row))
            feats = []
            for cidx, cell in enumerate(row):
                if cidx == label_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCell(rnum, header[cidx], cell) from None
                if not math.isfinite(v):
                    raise NonNumericCell(rnum, header[cidx], cell)
                feats.append(v)
            raw = row[label_idx]
            try:
                lbl = int(raw)
            except ValueError:
                raise NonNumericCell(rnum, label_column, raw) from None
            if lbl < 0:
                raise InvalidLabel(f"row {rnum}: negative label {lbl}")
            rows.append(feats)
            labels.append(lbl)
    if not rows:
        raise EmptyDataset(f"no data rows in {path}")
    X = np.asarray(rows, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if feature_kind == "auto":
        kind = _infer_kind(X)
    else:
        kind = FeatureKind(feature_kind)
    return LabeledDataset(
        features=X,
        labels=y,
        ids=np.arange(len(y), dtype=np.int64),
        k=int(y.max()) + 1,
        feature_kind=kind,
        feature_bounds=_bounds_for(X, kind),
        feature_names=tuple(names),
    )


def save_dataset_csv(data: LabeledDataset, path, label_column: str = "label") -> None:
    """Write a dataset back to CSV; values round-trip exactly through repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + [label_column])
        for i in range(data.n):
            writer.writerow([repr(float(v)) for v in data.features[i]] + [int(data.labels[i])])


def split_dataset(data: LabeledDataset, fractions, seed: int):
    """Split into disjoint (train, evasion) subsets, stratified by class.

    Each class is shuffled with the seeded stream and allocated
    round(fraction * class size) samples per side, so class proportions are
    preserved within one sample. Fractions must be positive and sum to <= 1;
    any remainder is dropped.
    """
    f_train, f_eva = float(fractions[0]), float(fractions[1])
    if f_train <= 0 or f_eva <= 0:
        raise InvalidFractions("fractions must be positive")
    if f_train + f_eva > 1.0 + 1e-12:
        raise InvalidFractions(f"fractions sum to {f_train + f_eva} > 1")
    if data.n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    train_pos, eva_pos = [], []
    for c in range(data.k):
        members = np.flatnonzero(data.labels == c)
        if members.size == 0:
            continue
        perm = rng_for(seed, c).permutation(members.size)
        members = members[perm]
        n_train = int(math.floor(f_train * members.size + 0.5))
        n_eva = int(math.floor(f_eva * members.size + 0.5))
        n_train = min(n_train, members.size)
        n_eva = min(n_eva, members.size - n_train)
        train_pos.extend(members[:n_train])
        eva_pos.extend(members[n_train : n_train + n_eva])
    train_pos = np.sort(np.asarray(train_pos, dtype=np.int64))
    eva_pos = np.sort(np.asarray(eva_pos, dtype=np.int64))
    return data.subset(train_pos), data.subset(eva_pos)


def apply_perturbation(x: Sample, rec: PerturbationRecord, bounds: np.ndarray) -> Sample:
    """Return x with the record's deltas added, clamped to per-feature bounds."""
    out = x.features.copy()
    idx = rec.perturbed_indices
    if idx.size:
        if idx.max() >= out.shape[0] or idx.min() < 0:
            raise ShapeMismatch(f"perturbed index out of range for d={out.shape[0]}")
        lo = bounds[idx, 0]
        hi = bounds[idx, 1]
        out[idx] = np.clip(out[idx] + rec.deltas, lo, hi)
    return Sample(id=x.id, features=out)
