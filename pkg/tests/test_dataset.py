import json

import numpy as np
import pandas as pd
import pytest

from texprint.config import build_config
from texprint.dataset import (
    CLASS_COLUMN,
    assemble_dataset,
    build_dataset,
    export_arff,
    export_csv,
    import_csv,
    parse_subject,
    scan_corpus,
    stratified_folds,
    write_failure_log,
)
from texprint.errors import DatasetError, EmptyDatasetError
from texprint.fixtures import synthesize_corpus
from texprint.texture import ATTRIBUTE_NAMES


@pytest.fixture
def fast_config():
    return build_config({"crop_size": 64, "diffusion_steps": 2, "distances": [1, 2]})


def test_parse_subject(tmp_path):
    assert parse_subject(tmp_path / "101_3.tif") == "101"
    with pytest.raises(DatasetError):
        parse_subject(tmp_path / "101.tif")
    with pytest.raises(DatasetError):
        parse_subject(tmp_path / "101_3_x.tif")


def test_scan_corpus_orders_by_name(tmp_path):
    synthesize_corpus(tmp_path, subjects=2, samples=2, size=32)
    (tmp_path / "notes.txt").write_text("ignored")
    names = [path.name for path, _ in scan_corpus(tmp_path)]
    assert names == ["101_1.pgm", "101_2.pgm", "102_1.pgm", "102_2.pgm"]


def test_scan_corpus_errors(tmp_path):
    with pytest.raises(DatasetError, match="does not exist"):
        scan_corpus(tmp_path / "missing")
    with pytest.raises(DatasetError, match="No images"):
        scan_corpus(tmp_path)
    synthesize_corpus(tmp_path, subjects=1, samples=1, size=32)
    (tmp_path / "oops.pgm").write_bytes((tmp_path / "101_1.pgm").read_bytes())
    with pytest.raises(DatasetError, match="oops.pgm"):
        scan_corpus(tmp_path)


def test_build_dataset_records_failures(tmp_path, fast_config):
    synthesize_corpus(tmp_path, subjects=2, samples=2, size=96)
    (tmp_path / "103_1.pgm").write_bytes(b"P5\n")
    ds = build_dataset(tmp_path, fast_config)
    assert len(ds) == 4
    assert ds.classes == ("101", "102")
    assert ds.attribute_names == ATTRIBUTE_NAMES
    assert len(ds.failures) == 1
    failure = ds.failures[0]
    assert failure["subject"] == "103"
    assert failure["error_type"] == "ImageError"
    assert failure["path"].endswith("103_1.pgm")


def test_build_dataset_with_nothing_extracted(tmp_path, fast_config):
    (tmp_path / "101_1.pgm").write_bytes(b"garbage")
    (tmp_path / "102_1.pgm").write_bytes(b"garbage")
    with pytest.raises(EmptyDatasetError) as info:
        build_dataset(tmp_path, fast_config)
    assert len(info.value.failures) == 2


def test_assemble_dataset_keeps_order(make_dataset):
    ds = make_dataset([[1.0], [2.0], [3.0]], ["b", "a", "b"])
    outcomes = [(ds.instances[0], None), (None, {"path": "x"}), (ds.instances[1], None), (ds.instances[2], None)]
    assembled = assemble_dataset(outcomes, ds.attribute_names)
    assert [i.label for i in assembled.instances] == ["b", "a", "b"]
    assert assembled.classes == ("a", "b")
    assert assembled.failures == ({"path": "x"},)


def test_csv_round_trip(tmp_path, make_dataset):
    rng = np.random.default_rng(0)
    ds = make_dataset(rng.normal(size=(6, 28)), ["101", "102"] * 3, names=ATTRIBUTE_NAMES)
    path = export_csv(ds, tmp_path / "features.csv")
    header = path.read_text().splitlines()[0].split(",")
    assert header == list(ATTRIBUTE_NAMES) + [CLASS_COLUMN]
    loaded = import_csv(path)
    assert loaded.classes == ds.classes
    assert [i.label for i in loaded.instances] == [i.label for i in ds.instances]
    np.testing.assert_array_equal(loaded.X, ds.X)


def test_import_rejects_bad_tables(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DatasetError, match="empty"):
        import_csv(empty)

    header_only = tmp_path / "header.csv"
    header_only.write_text("a,class\n")
    with pytest.raises(DatasetError, match="no instances"):
        import_csv(header_only, ["a"])

    wrong_header = tmp_path / "wrong.csv"
    wrong_header.write_text("b,class\n1,x\n")
    with pytest.raises(DatasetError, match="header"):
        import_csv(wrong_header, ["a"])

    wrong_arity = tmp_path / "arity.csv"
    wrong_arity.write_text("a,b,class\n1,x\n")
    with pytest.raises(DatasetError, match="arity"):
        import_csv(wrong_arity, ["a"])

    short_row = tmp_path / "short.csv"
    short_row.write_text("a,b,class\n1,2,x\n3,y\n")
    with pytest.raises(DatasetError, match="line"):
        import_csv(short_row, ["a", "b"])

    text_value = tmp_path / "text.csv"
    text_value.write_text("a,class\nhigh,x\n")
    with pytest.raises(DatasetError, match="Non-numeric"):
        import_csv(text_value, ["a"])

    with pytest.raises(DatasetError, match="not found"):
        import_csv(tmp_path / "absent.csv")


def test_numeric_class_labels_stay_strings(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,class\n1.5,101\n2.5,102\n")
    ds = import_csv(path, ["a"])
    assert ds.classes == ("101", "102")


def test_export_arff(tmp_path, make_dataset):
    ds = make_dataset([[1.0, 2.0], [3.0, 4.0]], ["x", "y"])
    text = export_arff(ds, tmp_path / "features.arff").read_text()
    assert "@attribute a0 numeric" in text
    assert "@attribute class {x,y}" in text
    assert text.strip().endswith("3.0,4.0,y")


def test_write_failure_log(tmp_path):
    failures = [{"path": "a.pgm", "subject": "1", "error_type": "ImageError", "error_message": "bad"}]
    lines = write_failure_log(failures, tmp_path / "failures.jsonl").read_text().splitlines()
    assert [json.loads(line) for line in lines] == failures


def test_stratified_folds_balance(make_dataset):
    labels = [str(c) for c in range(10) for _ in range(8)]
    ds = make_dataset(np.arange(80.0), labels)
    assignment = stratified_folds(ds, 10, seed=1)
    assert np.bincount(assignment.folds, minlength=10).tolist() == [8] * 10
    y = ds.y
    for class_index in range(10):
        folds = assignment.folds[y == class_index]
        assert len(set(folds.tolist())) == 8
    for fold in range(10):
        test = set(assignment.test_indices(fold).tolist())
        train = set(assignment.train_indices(fold).tolist())
        assert not test & train and len(test | train) == 80


def test_stratified_folds_are_deterministic(make_dataset):
    ds = make_dataset(np.arange(30.0), ["a", "b", "c"] * 10)
    first = stratified_folds(ds, 5, seed=9).folds
    np.testing.assert_array_equal(first, stratified_folds(ds, 5, seed=9).folds)
    assert not np.array_equal(first, stratified_folds(ds, 5, seed=10).folds)


def test_stratified_folds_errors(make_dataset):
    ds = make_dataset(np.arange(4.0), ["a", "b"] * 2)
    with pytest.raises(DatasetError):
        stratified_folds(ds, 1, seed=1)
    with pytest.raises(DatasetError):
        stratified_folds(ds, 5, seed=1)


def test_subset_keeps_all_classes(make_dataset):
    ds = make_dataset([[1.0], [2.0], [3.0]], ["a", "b", "c"])
    sub = ds.subset([0, 2])
    assert sub.classes == ("a", "b", "c")
    assert sub.y.tolist() == [0, 2]


def test_features_frame_shape(tmp_path, make_dataset):
    ds = make_dataset(np.zeros((3, 28)), ["1", "2", "3"], names=ATTRIBUTE_NAMES)
    frame = pd.read_csv(export_csv(ds, tmp_path / "f.csv"))
    assert frame.shape == (3, 29)
