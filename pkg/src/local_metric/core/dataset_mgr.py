"""
Copyright 2025 local-metric contributors

Reading binary classification datasets (LIBSVM text format or numeric CSV with a header),
seeded train / test splits and the standardize-then-L2-normalize preprocessing.
"""
import csv
import io
import math
import os
import re
from typing import Dict, List, Optional, Tuple, Union
import numpy as np
from sklearn.datasets import dump_svmlight_file, load_svmlight_file
from sklearn.preprocessing import StandardScaler, normalize
from local_metric.core.models.dataset_model import LabeledDataset, PreprocessingStats, RawDataset
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError, DataFormatError

LIBSVM_FEATURE = re.compile(r"^(\d+):(\S+)$")
SPLIT_ATTEMPTS = 100
ZERO_STD = 1e-12
STATISTICS_MODES = ("train", "global")


# ----------- Public APIs  ------------------------------------------------------------

def parse_libsvm(text: str, name: str = "dataset") -> RawDataset:
    """
    Parses `label idx:val idx:val ...` lines with 1-based, strictly increasing indices.
    Blank lines and `#` comments are skipped. Missing entries are 0 and the matrix is as
    wide as the largest index seen.
    """
    records: List[str] = []
    labels: List[float] = []
    line_numbers: List[int] = []
    max_index = 0
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        labels.append(_parse_float(tokens[0], line_number, 1, "label"))
        previous = 0
        for column, token in enumerate(tokens[1:], start=2):
            match = LIBSVM_FEATURE.match(token)
            if not match:
                logger.error(f"Malformed LIBSVM token '{token}' at line {line_number}")
                raise DataFormatError(f"malformed feature token '{token}'", line_number, column)
            index = int(match.group(1))
            if index < 1:
                raise DataFormatError(f"feature index must be >= 1, got {index}", line_number, column)
            if index <= previous:
                logger.error(f"Non increasing feature index {index} after {previous} at line {line_number}")
                raise DataFormatError(f"feature index {index} does not increase (previous {previous})", line_number, column)
            _parse_float(match.group(2), line_number, column, "feature value")
            previous = index
        max_index = max(max_index, previous)
        records.append(content)
        line_numbers.append(line_number)
    if not records:
        raise DataFormatError("no records found")
    mapped, source_labels = _map_labels(labels, line_numbers)
    matrix, _ = load_svmlight_file(io.BytesIO("\n".join(records).encode("utf-8")),
                                   n_features=max(max_index, 1),
                                   dtype=np.float64,
                                   zero_based=False)
    instances = matrix.toarray()
    logger.info(f"Parsed LIBSVM dataset {name}: {instances.shape[0]} instances, {instances.shape[1]} features")
    return RawDataset(instances=instances, labels=mapped, name=name, source_labels=source_labels, declared_dim=max_index)


def to_libsvm(dataset: RawDataset) -> str:
    """Serializes back to the LIBSVM text format with the source labels."""
    if dataset.source_labels:
        lookup = {-1: dataset.source_labels[0], 1: dataset.source_labels[-1]}
        labels = np.asarray([lookup[int(label)] for label in dataset.labels], dtype=float)
    else:
        labels = dataset.labels.astype(float)
    buffer = io.BytesIO()
    dump_svmlight_file(dataset.instances, labels, buffer, zero_based=False)
    return buffer.getvalue().decode("utf-8")


def parse_csv(text: str, label_column: Union[str, int] = "label", name: str = "dataset") -> RawDataset:
    """
    Numeric CSV with a header row. The label column is given by header name or by
    position (negative positions count from the end); every other column is a feature.
    """
    reader = csv.reader(io.StringIO(text))
    header: Optional[List[str]] = None
    rows: List[List[float]] = []
    line_numbers: List[int] = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip() for cell in row]
            label_index = _resolve_label_column(header, label_column)
            continue
        if len(row) != len(header):
            logger.error(f"Ragged CSV row at line {reader.line_num}: {len(row)} cells, header has {len(header)}")
            raise DataFormatError(f"expected {len(header)} cells, got {len(row)}", reader.line_num)
        rows.append([_parse_float(cell, reader.line_num, column, "cell") for column, cell in enumerate(row, start=1)])
        line_numbers.append(reader.line_num)
    if header is None or not rows:
        raise DataFormatError("no records found")
    table = np.asarray(rows, dtype=float)
    labels = table[:, label_index]
    instances = np.delete(table, label_index, axis=1)
    mapped, source_labels = _map_labels(labels.tolist(), line_numbers)
    logger.info(f"Parsed CSV dataset {name}: {instances.shape[0]} instances, {instances.shape[1]} features")
    return RawDataset(instances=instances, labels=mapped, name=name, source_labels=source_labels, declared_dim=instances.shape[1])


def load_dataset(path: str, fmt: Optional[str] = None, label_column: Union[str, int] = "label") -> RawDataset:
    """Reads a dataset file; without an explicit format, `.csv` files are CSV and anything else LIBSVM."""
    fmt = fmt or ("csv" if path.lower().endswith(".csv") else "libsvm")
    if fmt not in ("csv", "libsvm"):
        raise ConfigurationError(f"unknown dataset format '{fmt}', expected libsvm or csv")
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Cannot read dataset {path}: {e}")
        raise DataFormatError(f"cannot read {path}: {e}") from e
    name = os.path.splitext(os.path.basename(path))[0]
    if fmt == "csv":
        return parse_csv(text, label_column, name)
    return parse_libsvm(text, name)


def split(dataset: LabeledDataset, train_fraction: float, seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Seeded shuffle, the first ceil(n * train_fraction) instances go to train. A shuffle that
    leaves a class out of train is redrawn with the sub-seed [seed, attempt].
    """
    if not 0 < train_fraction < 1:
        raise ConfigurationError(f"train fraction must be in (0, 1), got {train_fraction}")
    n = dataset.size
    n_train = math.ceil(n * train_fraction)
    if n_train >= n:
        raise ConfigurationError(f"train fraction {train_fraction} leaves no test instance out of {n}")
    for attempt in range(SPLIT_ATTEMPTS):
        rng = np.random.default_rng(seed if attempt == 0 else [seed, attempt])
        order = rng.permutation(n)
        train_indices = order[:n_train]
        if np.unique(dataset.labels[train_indices]).size == 2:
            if attempt:
                logger.info(f"Split with seed {seed} needed {attempt + 1} draws to keep both classes in train")
            return dataset.subset(train_indices), dataset.subset(order[n_train:])
    logger.error(f"No split of {dataset.name} with seed {seed} keeps both classes in train")
    raise DataFormatError(f"could not draw a split with both classes in train after {SPLIT_ATTEMPTS} attempts")


def fit_preprocessing(train: LabeledDataset,
                      test: Optional[LabeledDataset] = None,
                      statistics: str = "train") -> PreprocessingStats:
    """Per-feature mean and std, from the train split only or from train and test together."""
    if statistics not in STATISTICS_MODES:
        raise ConfigurationError(f"statistics must be one of {STATISTICS_MODES}, got '{statistics}'")
    data = train.instances
    if statistics == "global" and test is not None:
        data = np.vstack([train.instances, test.instances])
    scaler = StandardScaler().fit(data)
    std = np.sqrt(scaler.var_)
    scale = np.where(std < ZERO_STD, 1.0, std)
    return PreprocessingStats(mean=scaler.mean_.tolist(), scale=scale.tolist(), statistics=statistics)


def standardize(dataset: LabeledDataset, stats: PreprocessingStats) -> LabeledDataset:
    mean = np.asarray(stats.mean)
    scale = np.asarray(stats.scale)
    if mean.shape[0] != dataset.dim:
        raise ConfigurationError(f"preprocessing statistics have {mean.shape[0]} features, dataset has {dataset.dim}")
    return LabeledDataset(instances=(dataset.instances - mean) / scale, labels=dataset.labels, name=dataset.name)


def apply_preprocessing(dataset: LabeledDataset, stats: PreprocessingStats) -> LabeledDataset:
    """Standardize with the given statistics, then scale every instance to unit L2 norm."""
    standardized = standardize(dataset, stats)
    return LabeledDataset(instances=normalize(standardized.instances, norm="l2"),
                          labels=dataset.labels,
                          name=dataset.name)


def preprocess(train: LabeledDataset,
               test: LabeledDataset,
               statistics: str = "train") -> Tuple[LabeledDataset, LabeledDataset]:
    stats = fit_preprocessing(train, test, statistics)
    return apply_preprocessing(train, stats), apply_preprocessing(test, stats)


# ----------- Private APIs  ------------------------------------------------------------

def _parse_float(token: str, line: int, column: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        logger.error(f"Non numeric {what} '{token}' at line {line}, column {column}")
        raise DataFormatError(f"non numeric {what} '{token}'", line, column) from None
    if not math.isfinite(value):
        raise DataFormatError(f"non finite {what} '{token}'", line, column)
    return value


def _map_labels(labels: List[float], line_numbers: List[int]) -> Tuple[np.ndarray, List[float]]:
    """Ascending source labels map to (-1, +1). A single-class file keeps the sign of its label."""
    seen: Dict[float, int] = {}
    for label, line in zip(labels, line_numbers):
        if label not in seen:
            if len(seen) == 2:
                logger.error(f"Third class label {label} at line {line}")
                raise DataFormatError(f"more than two classes: found label {label} after {sorted(seen)}", line)
            seen[label] = line
    source_labels = sorted(seen)
    if len(source_labels) == 1:
        logger.warning(f"Only one class ({source_labels[0]}) in the data")
        mapped_value = 1 if source_labels[0] > 0 else -1
        return np.full(len(labels), mapped_value, dtype=int), source_labels
    values = np.asarray(labels)
    return np.where(values == source_labels[1], 1, -1), source_labels


def _resolve_label_column(header: List[str], label_column: Union[str, int]) -> int:
    if isinstance(label_column, str) and label_column in header:
        return header.index(label_column)
    try:
        index = int(label_column)
    except (TypeError, ValueError):
        raise DataFormatError(f"label column '{label_column}' not in header {header}", 1) from None
    if not -len(header) <= index < len(header):
        raise DataFormatError(f"label column {index} out of range for {len(header)} columns", 1)
    return index % len(header)
