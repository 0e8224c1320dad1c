"""
Copyright 2025 local-metric contributors
"""
import unittest
import os
import pathlib
os.environ["CONFIG_FILE"] = str(pathlib.Path(__file__).parent.parent.parent / "config.yaml")
os.environ.setdefault("LOCAL_METRIC_HOME", str(pathlib.Path(__file__).parent.parent.parent / "tmp"))

import numpy as np
from local_metric.core.models.dataset_model import LabeledDataset
from local_metric.core.utils.errors import ConfigurationError, DataFormatError
from local_metric.core.dataset_mgr import (
    apply_preprocessing,
    fit_preprocessing,
    load_dataset,
    parse_csv,
    parse_libsvm,
    preprocess,
    split,
    standardize,
    to_libsvm,
)

DATA_DIR = pathlib.Path(__file__).parent.parent.parent / "data"


def _dataset(n: int, positives: int, dim: int = 3, seed: int = 0) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    labels = np.array([1] * positives + [-1] * (n - positives))
    return LabeledDataset(instances=rng.normal(size=(n, dim)), labels=labels, name="synthetic")


class TestDatasetMgr(unittest.TestCase):

    def test_libsvm_record(self):
        dataset = parse_libsvm("+1 1:0.5 3:2.0\n")
        np.testing.assert_array_equal(dataset.instances, [[0.5, 0.0, 2.0]])
        np.testing.assert_array_equal(dataset.labels, [1])
        assert dataset.declared_dim == 3

    def test_libsvm_blank_lines_and_comments(self):
        dataset = parse_libsvm("# header\n-1 2:1.5\n\n   \n+1 1:0.25  # trailing\n")
        assert dataset.size == 2
        np.testing.assert_array_equal(dataset.instances, [[0.0, 1.5], [0.25, 0.0]])
        np.testing.assert_array_equal(dataset.labels, [-1, 1])
        assert dataset.source_labels == [-1.0, 1.0]

    def test_libsvm_label_mapping(self):
        dataset = parse_libsvm("2 1:1\n1 1:2\n2 1:3\n")
        np.testing.assert_array_equal(dataset.labels, [1, -1, 1])
        assert dataset.source_labels == [1.0, 2.0]

    def test_libsvm_errors(self):
        cases = {"+1 1:0.5\n-1 1:abc\n": 2,
                 "+1 1:0.5\n-1 x:1\n": 2,
                 "+1 2:0.5 1:1.0\n": 1,
                 "+1 0:0.5\n": 1,
                 "1 1:1\n2 1:1\n\n3 1:1\n": 4,
                 "one 1:1\n": 1}
        for text, line in cases.items():
            with self.assertRaises(DataFormatError) as context:
                parse_libsvm(text)
            print(context.exception)
            assert context.exception.line == line
        with self.assertRaises(DataFormatError):
            parse_libsvm("# nothing\n\n")

    def test_csv_table(self):
        dataset = parse_csv("a,b,label\n1,2,0\n3,4,1\n5,6,0\n")
        assert dataset.size == 3
        assert dataset.dim == 2
        np.testing.assert_array_equal(dataset.instances, [[1, 2], [3, 4], [5, 6]])
        np.testing.assert_array_equal(dataset.labels, [-1, 1, -1])

    def test_csv_label_column_by_position(self):
        dataset = parse_csv("y,a,b\n1,0.5,0.25\n2,0.75,1\n", label_column=0)
        np.testing.assert_array_equal(dataset.instances, [[0.5, 0.25], [0.75, 1.0]])
        np.testing.assert_array_equal(dataset.labels, [-1, 1])
        np.testing.assert_array_equal(parse_csv("a,b,y\n1,2,0\n3,4,1\n", label_column=-1).labels, [-1, 1])

    def test_csv_errors(self):
        with self.assertRaises(DataFormatError) as context:
            parse_csv("a,b,label\n1,2,0\n3,4\n")
        assert context.exception.line == 3
        with self.assertRaises(DataFormatError) as context:
            parse_csv("a,b,label\n1,2,0\n3,x,1\n")
        assert context.exception.line == 3
        assert context.exception.column == 2
        with self.assertRaises(DataFormatError):
            parse_csv("a,b,c\n1,2,0\n", label_column="label")
        with self.assertRaises(DataFormatError):
            parse_csv("a,b,label\n")

    def test_round_trip(self):
        original = parse_libsvm("0 1:0.5 2:1.25 3:-2\n1 2:3.5 3:0.75\n0 1:-1 3:4\n")
        again = parse_libsvm(to_libsvm(original))
        np.testing.assert_array_equal(again.instances, original.instances)
        np.testing.assert_array_equal(again.labels, original.labels)
        assert again.source_labels == original.source_labels

    def test_libsvm_and_csv_files_agree(self):
        from_libsvm = load_dataset(str(DATA_DIR / "toy.libsvm"))
        from_csv = load_dataset(str(DATA_DIR / "toy.csv"))
        assert from_libsvm.name == "toy"
        assert from_libsvm.size == 24
        np.testing.assert_array_equal(from_libsvm.instances, from_csv.instances)
        np.testing.assert_array_equal(from_libsvm.labels, from_csv.labels)

    def test_load_errors(self):
        with self.assertRaises(DataFormatError):
            load_dataset(str(DATA_DIR / "missing.libsvm"))
        with self.assertRaises(ConfigurationError):
            load_dataset(str(DATA_DIR / "toy.libsvm"), fmt="arff")

    def test_split_cardinality(self):
        dataset = _dataset(10, 5)
        train, test = split(dataset, 0.6, seed=0)
        assert train.size == 6
        assert test.size == 4
        rows = {tuple(r) for r in train.instances} | {tuple(r) for r in test.instances}
        assert rows == {tuple(r) for r in dataset.instances}

    def test_split_is_deterministic(self):
        dataset = _dataset(30, 12)
        first, _ = split(dataset, 0.6, seed=4)
        second, _ = split(dataset, 0.6, seed=4)
        np.testing.assert_array_equal(first.instances, second.instances)

    def test_split_proportions(self):
        dataset = _dataset(200, 120)
        seen = set()
        for seed in range(10):
            train, _ = split(dataset, 0.6, seed=seed)
            seen.add(tuple(train.instances[:, 0]))
            proportion = np.mean(train.labels == 1)
            assert abs(proportion - 0.6) <= 0.12, f"seed {seed}: positive proportion {proportion}"
        assert len(seen) == 10

    def test_split_keeps_both_classes(self):
        dataset = _dataset(10, 1)
        for seed in range(20):
            train, _ = split(dataset, 0.2, seed=seed)
            assert set(train.labels.tolist()) == {-1, 1}

    def test_split_errors(self):
        with self.assertRaises(DataFormatError):
            split(_dataset(10, 10), 0.6, seed=0)
        with self.assertRaises(ConfigurationError):
            split(_dataset(10, 5), 1.0, seed=0)
        with self.assertRaises(ConfigurationError):
            split(_dataset(10, 5), 0.95, seed=0)

    def test_constant_column_is_centered(self):
        train = LabeledDataset(instances=[[3.0, 1.0], [3.0, 2.0], [3.0, 4.0]], labels=[1, -1, 1])
        stats = fit_preprocessing(train)
        assert stats.scale[0] == 1.0
        np.testing.assert_array_equal(standardize(train, stats).instances[:, 0], [0.0, 0.0, 0.0])

    def test_standardized_columns(self):
        train = _dataset(50, 20, dim=4, seed=1)
        train = LabeledDataset(instances=train.instances * [1, 10, 0.1, 5] + [2, -3, 0, 7], labels=train.labels)
        standardized = standardize(train, fit_preprocessing(train)).instances
        np.testing.assert_allclose(standardized.mean(axis=0), 0, atol=1e-10)
        np.testing.assert_allclose(standardized.std(axis=0), 1, atol=1e-10)

    def test_unit_norm_rows(self):
        train = _dataset(40, 15, seed=2)
        test = _dataset(20, 10, seed=3)
        for statistics in ("train", "global"):
            train_out, test_out = preprocess(train, test, statistics)
            for instances in (train_out.instances, test_out.instances):
                norms = np.linalg.norm(instances, axis=1)
                assert np.all((np.abs(norms - 1) <= 1e-12) | (norms == 0))

    def test_statistics_modes(self):
        train = _dataset(40, 15, seed=4)
        test = LabeledDataset(instances=_dataset(20, 10, seed=5).instances + 3, labels=_dataset(20, 10).labels)
        only_train = fit_preprocessing(train, test, "train")
        both = fit_preprocessing(train, test, "global")
        np.testing.assert_allclose(only_train.mean, train.instances.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(both.mean, np.vstack([train.instances, test.instances]).mean(axis=0), atol=1e-12)
        train_out, test_out = preprocess(train, test, "train")
        np.testing.assert_array_equal(test_out.instances, apply_preprocessing(test, only_train).instances)
        with self.assertRaises(ConfigurationError):
            fit_preprocessing(train, test, "test")


if __name__ == '__main__':
    unittest.main()
