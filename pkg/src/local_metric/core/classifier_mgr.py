"""
Copyright 2025 local-metric contributors

K-min classifier: f(x) is the mean of the K smallest composite distances from x to the negative
class minus the same mean for the positive class. Positive f predicts +1.
"""
import math
from typing import Optional
import numpy as np
from pydantic import BaseModel, Field
from local_metric.core.distance_mgr import distances_to_set
from local_metric.core.metric_mgr import frobenius_norm, spectral_sqrt_norm
from local_metric.core.models.dataset_model import LabeledDataset
from local_metric.core.models.metric_model import ModelParams
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError, DataFormatError


class LipschitzDiagnostics(BaseModel):
    frobenius_bound: float = Field(description="2 (sum of Frobenius norms of all metrics)")
    spectral_bound: float = Field(description="2 (sum of sqrt of the largest eigenvalue of all metrics)")
    empirical_ratio: Optional[float] = Field(default=None, description="largest |f(x1) - f(x2)| / |x1 - x2| seen on random pairs")


# ----------- Public APIs  ------------------------------------------------------------

def decision_value(x: np.ndarray, trainset: LabeledDataset, model: ModelParams, k: int) -> float:
    negatives, positives = _class_members(trainset, k)
    distances = distances_to_set(x, trainset.instances, model)
    return _kmin_mean(distances, negatives, k) - _kmin_mean(distances, positives, k)


def decision_values(instances: np.ndarray, trainset: LabeledDataset, model: ModelParams, k: int) -> np.ndarray:
    instances = np.atleast_2d(np.asarray(instances, dtype=float))
    negatives, positives = _class_members(trainset, k)
    values = np.empty(len(instances))
    for t, x in enumerate(instances):
        distances = distances_to_set(x, trainset.instances, model)
        values[t] = _kmin_mean(distances, negatives, k) - _kmin_mean(distances, positives, k)
    return values


def predict(x: np.ndarray, trainset: LabeledDataset, model: ModelParams, k: int) -> int:
    return _sign(decision_value(x, trainset, model, k))


def predict_all(instances: np.ndarray, trainset: LabeledDataset, model: ModelParams, k: int) -> np.ndarray:
    return np.where(decision_values(instances, trainset, model, k) >= 0, 1, -1)


def evaluate(testset: LabeledDataset, trainset: LabeledDataset, model: ModelParams, k: int) -> float:
    """Fraction of the test set predicted correctly."""
    predictions = predict_all(testset.instances, trainset, model, k)
    accuracy = float(np.mean(predictions == testset.labels))
    logger.info(f"Accuracy on {testset.size} instances with K={k}, S={model.num_regions}: {accuracy:.4f}")
    return accuracy


def lipschitz_diagnostics(model: ModelParams, k: int) -> LipschitzDiagnostics:
    """
    Upper bounds on the Lipschitz constant of the decision function. Neither depends on K.
    The spectral bound is the tighter one; the Frobenius one is the model regularizer.
    """
    if k < 1:
        raise ConfigurationError(f"K must be positive, got {k}")
    metrics = model.metrics()
    return LipschitzDiagnostics(frobenius_bound=2.0 * math.fsum(frobenius_norm(m) for m in metrics),
                                spectral_bound=2.0 * math.fsum(spectral_sqrt_norm(m) for m in metrics))


def empirical_lipschitz_ratio(trainset: LabeledDataset,
                              model: ModelParams,
                              k: int,
                              num_pairs: int = 10000,
                              seed: int = 0) -> float:
    """
    Largest |f(x1) - f(x2)| / |x1 - x2| over random pairs drawn in the bounding box of the
    train set, grown by 10% on each side. Half of the pairs are close pairs (x2 near x1).
    """
    rng = np.random.default_rng(seed)
    low = trainset.instances.min(axis=0)
    high = trainset.instances.max(axis=0)
    pad = 0.1 * np.maximum(high - low, 1e-3)
    low, high = low - pad, high + pad
    first = rng.uniform(low, high, size=(num_pairs, trainset.dim))
    second = rng.uniform(low, high, size=(num_pairs, trainset.dim))
    close = num_pairs // 2
    second[:close] = first[:close] + rng.normal(scale=0.01, size=(close, trainset.dim)) * (high - low)
    gaps = np.linalg.norm(first - second, axis=1)
    keep = gaps > 0
    if not np.any(keep):
        return 0.0
    values_1 = decision_values(first[keep], trainset, model, k)
    values_2 = decision_values(second[keep], trainset, model, k)
    return float(np.max(np.abs(values_1 - values_2) / gaps[keep]))


# ----------- Private APIs  ------------------------------------------------------------

def _class_members(trainset: LabeledDataset, k: int):
    if k < 1:
        raise ConfigurationError(f"K must be positive, got {k}")
    negatives = trainset.class_indices(-1)
    positives = trainset.class_indices(1)
    if negatives.size == 0 or positives.size == 0:
        logger.error(f"train set {trainset.name} misses a class: {negatives.size} negative, {positives.size} positive")
        raise DataFormatError(f"the train set needs both classes, got {negatives.size} negative and {positives.size} positive instances")
    return negatives, positives


def _kmin_mean(distances: np.ndarray, members: np.ndarray, k: int) -> float:
    """Mean of the min(K, class size) smallest distances; ties go to the lower training index."""
    count = min(k, members.size)
    nearest = members[np.argsort(distances[members], kind="stable")[:count]]
    return math.fsum(distances[nearest]) / count


def _sign(value: float) -> int:
    return 1 if value >= 0 else -1
