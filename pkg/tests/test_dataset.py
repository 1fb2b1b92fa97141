import csv

import numpy as np
import pytest

from evadex.dataset import (
    FeatureKind,
    PerturbationRecord,
    apply_perturbation,
    load_dataset_csv,
    save_dataset_csv,
    split_dataset,
)
from evadex.errors import (
    EmptyDataset,
    InvalidFractions,
    MissingFile,
    NonNumericCell,
    RaggedRows,
    UnknownLabelColumn,
)
from evadex.synth import binary_planted, continuous_blobs

from conftest import sample_of


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def test_load_binary_inference(tmp_path):
    p = tmp_path / "tiny.csv"
    write_csv(p, [["f0", "f1", "label"], [0, 1, 0], [1, 1, 1], [0, 0, 1]])
    data = load_dataset_csv(p)
    assert data.d == 2 and data.k == 2 and data.n == 3
    assert data.feature_kind is FeatureKind.BINARY
    assert data.feature_names == ("f0", "f1")


def test_load_nan_cell_reports_position(tmp_path):
    p = tmp_path / "nan.csv"
    write_csv(p, [["a", "b", "label"], [0.5, "nan", 0]])
    with pytest.raises(NonNumericCell) as exc:
        load_dataset_csv(p)
    assert exc.value.row == 0 and exc.value.col == "b"


def test_load_non_numeric_cell(tmp_path):
    p = tmp_path / "bad.csv"
    write_csv(p, [["a", "label"], ["oops", 1]])
    with pytest.raises(NonNumericCell):
        load_dataset_csv(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(MissingFile):
        load_dataset_csv(tmp_path / "absent.csv")


def test_load_ragged_rows(tmp_path):
    p = tmp_path / "ragged.csv"
    write_csv(p, [["a", "b", "label"], [1, 2, 0], [1, 2]])
    with pytest.raises(RaggedRows):
        load_dataset_csv(p)


def test_load_unknown_label_column(tmp_path):
    p = tmp_path / "nolabel.csv"
    write_csv(p, [["a", "b"], [1, 2]])
    with pytest.raises(UnknownLabelColumn):
        load_dataset_csv(p, label_column="label")


def test_continuous_bounds_match_column_scan_oracle(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(0.0, 2.0, size=(100, 4))
    y = rng.integers(0, 3, size=100)
    p = tmp_path / "cont.csv"
    rows = [["c0", "c1", "c2", "c3", "label"]]
    rows += [[repr(float(v)) for v in row] + [int(lbl)] for row, lbl in zip(X, y)]
    write_csv(p, rows)
    data = load_dataset_csv(p)
    assert data.k == 3
    assert data.feature_kind is FeatureKind.CONTINUOUS
    # independent oracle: re-scan the text file column by column
    with open(p) as fh:
        reader = csv.reader(fh)
        next(reader)
        cols = list(zip(*[[float(c) for c in row[:4]] for row in reader]))
    for j, col in enumerate(cols):
        assert data.feature_bounds[j, 0] == min(col)
        assert data.feature_bounds[j, 1] == max(col)


def test_csv_round_trip_identity(tmp_path):
    data = continuous_blobs(60, 7, seed=5, k=3)
    p = tmp_path / "rt.csv"
    save_dataset_csv(data, p)
    back = load_dataset_csv(p)
    assert np.array_equal(back.features, data.features)
    assert np.array_equal(back.labels, data.labels)
    assert back.feature_names == data.feature_names


def test_binary_round_trip_identity(tmp_path):
    data = binary_planted(40, 9, seed=1)
    p = tmp_path / "rt.csv"
    save_dataset_csv(data, p)
    back = load_dataset_csv(p)
    assert back.feature_kind is FeatureKind.BINARY
    assert np.array_equal(back.features, data.features)


def test_split_counts_and_disjointness():
    data = binary_planted(10, 5, seed=2)
    train, eva = split_dataset(data, (0.6, 0.4), seed=7)
    assert train.n == 6 and eva.n == 4
    assert not set(train.ids) & set(eva.ids)
    assert set(train.ids) | set(eva.ids) <= set(data.ids)


def test_split_deterministic():
    data = binary_planted(50, 6, seed=0)
    a1, b1 = split_dataset(data, (0.6, 0.4), seed=9)
    a2, b2 = split_dataset(data, (0.6, 0.4), seed=9)
    assert np.array_equal(a1.ids, a2.ids) and np.array_equal(b1.ids, b2.ids)


def test_split_stratified_within_one():
    rng = np.random.default_rng(0)
    X = (rng.random((100, 4)) < 0.5).astype(float)
    y = np.array([0] * 50 + [1] * 50)
    from conftest import make_binary_dataset

    data = make_binary_dataset(X, y)
    train, eva = split_dataset(data, (0.6, 0.4), seed=1)
    for part, frac in ((train, 0.6), (eva, 0.4)):
        for c in (0, 1):
            assert abs(int(np.sum(part.labels == c)) - frac * 50) <= 1


def test_split_bad_fractions():
    data = binary_planted(10, 3, seed=0)
    with pytest.raises(InvalidFractions):
        split_dataset(data, (0.7, 0.5), seed=0)
    with pytest.raises(InvalidFractions):
        split_dataset(data, (0.0, 0.5), seed=0)


def test_apply_perturbation_flip():
    x = sample_of([0, 0, 1])
    rec = PerturbationRecord(0, np.array([1]), np.array([1.0]), False, 0, 0)
    bounds = np.array([[0.0, 1.0]] * 3)
    out = apply_perturbation(x, rec, bounds)
    assert out.features.tolist() == [0.0, 1.0, 1.0]
    assert x.features.tolist() == [0.0, 0.0, 1.0]  # input untouched


def test_apply_perturbation_empty_identity():
    x = sample_of([0.3, 0.7])
    rec = PerturbationRecord(0, np.array([], dtype=np.int64), np.array([]), False, 0, 0)
    out = apply_perturbation(x, rec, np.array([[0.0, 1.0]] * 2))
    assert np.array_equal(out.features, x.features)


def test_apply_perturbation_clamps():
    x = sample_of([0.9])
    rec = PerturbationRecord(0, np.array([0]), np.array([0.5]), False, 0, 0)
    out = apply_perturbation(x, rec, np.array([[0.0, 1.0]]))
    assert out.features[0] == 1.0


def test_apply_perturbation_binary_flip_idempotent_and_bounded():
    rng = np.random.default_rng(4)
    bounds = np.array([[0.0, 1.0]] * 8)
    for _ in range(200):
        x = sample_of((rng.random(8) < 0.5).astype(float))
        idx = rng.choice(8, size=rng.integers(1, 5), replace=False)
        rec = PerturbationRecord(0, np.sort(idx), np.ones(idx.size), False, 0, 0)
        once = apply_perturbation(x, rec, bounds)
        twice = apply_perturbation(once, rec, bounds)
        assert np.array_equal(once.features, twice.features)
        assert np.all((once.features == 0.0) | (once.features == 1.0))


def test_apply_perturbation_index_out_of_range():
    x = sample_of([0.0, 1.0])
    rec = PerturbationRecord(0, np.array([5]), np.array([1.0]), False, 0, 0)
    from evadex.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        apply_perturbation(x, rec, np.array([[0.0, 1.0]] * 2))


def test_empty_split_errors():
    data = binary_planted(10, 3, seed=0)
    empty = data.subset(np.array([], dtype=np.int64))
    with pytest.raises(EmptyDataset):
        split_dataset(empty, (0.6, 0.4), seed=0)
