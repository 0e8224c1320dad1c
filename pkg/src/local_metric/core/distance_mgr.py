"""
Copyright 2025 local-metric contributors

Composite distance between two instances:

    D(x_i, x_j) = (1 - sum_s gamma_s) L_B + sum_s gamma_s L_s

where gamma_s is the fraction of the segment x_i -> x_j inside region s, L_s the Mahalanobis
length under the region metric and L_B the length under the background metric. The background
weight is clamped at 0 when overlapping regions cover more than the whole segment.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from local_metric.core.geometry_mgr import batch_gamma_gradients, batch_intersection
from local_metric.core.metric_mgr import NEGATIVE_FORM_TOLERANCE
from local_metric.core.models.metric_model import DistanceGradients, ModelParams
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError

ZERO_LENGTH_FORM = 1e-12


class _PairTerms(NamedTuple):
    differences: np.ndarray  # (n, d) x_i - x_j
    gammas: np.ndarray  # (S, n)
    gamma_background: np.ndarray  # (n,)
    length_background: np.ndarray  # (n,)
    lengths: np.ndarray  # (S, n)


# ----------- Public APIs  ------------------------------------------------------------

def pairwise_composite_distance(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> np.ndarray:
    """Composite distance for every row pair (starts[k], ends[k])."""
    starts, ends = _check_pairs(starts, ends, model)
    return composite_from_coverage(starts - ends,
                                   _coverage(starts, ends, model),
                                   model.background_metric,
                                   [region.metric for region in model.regions])


def composite_from_coverage(differences: np.ndarray,
                            gammas: np.ndarray,
                            background_metric: np.ndarray,
                            region_metrics: Sequence[np.ndarray]) -> np.ndarray:
    """
    Composite distance of pairs with differences (n, d) whose coverage gammas (S, n) is known.
    The coverage only depends on the balls, so it stays valid while the metrics alone change.
    """
    gamma_background = np.maximum(1.0 - np.sum(gammas, axis=0), 0.0)
    distances = gamma_background * _lengths(differences, background_metric)
    for s, metric in enumerate(region_metrics):
        distances = distances + gammas[s] * _lengths(differences, metric)
    return distances


def composite_distance(x_i: np.ndarray, x_j: np.ndarray, model: ModelParams) -> float:
    x_i, x_j = _check_pair(x_i, x_j, model)
    return float(pairwise_composite_distance(x_i[None, :], x_j[None, :], model)[0])


def distances_to_set(x: np.ndarray, instances: np.ndarray, model: ModelParams) -> np.ndarray:
    """Composite distance from x to every row of instances, segment oriented x -> instance."""
    x = np.asarray(x, dtype=float)
    instances = np.atleast_2d(np.asarray(instances, dtype=float))
    if x.shape != (model.dim,) or instances.shape[1] != model.dim:
        logger.error(f"dimension mismatch: point {x.shape}, instances {instances.shape}, model {model.dim}")
        raise ConfigurationError(f"dimension mismatch: point {x.shape}, instances {instances.shape}, model dimension {model.dim}")
    starts = np.broadcast_to(x, instances.shape)
    return pairwise_composite_distance(starts, instances, model)


def weighted_distance_gradients(starts: np.ndarray,
                                ends: np.ndarray,
                                model: ModelParams,
                                weights: Optional[np.ndarray] = None) -> DistanceGradients:
    """
    Sum over pairs k of weights[k] * grad D(starts[k], ends[k]).

    grad M_B   = gamma_B / (2 L_B) v v^T          (0 when gamma_B is clamped or L_B is 0)
    grad M_s   = gamma_s / (2 L_s) v v^T
    grad o_s   = (L_s - 1[gamma_B > 0] L_B) d gamma_s / d o_s
    grad r_s   = (L_s - 1[gamma_B > 0] L_B) d gamma_s / d r_s
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    n = starts.shape[0]
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ConfigurationError(f"expected {n} weights, got shape {weights.shape}")
    grads = DistanceGradients.zeros_like(model)
    if n == 0:
        return grads
    terms = _pair_terms(starts, ends, model)
    v = terms.differences
    background_active = terms.gamma_background > 0

    coef = weights * np.where(background_active, _half_ratio(terms.gamma_background, terms.length_background), 0.0)
    d_background = (v * coef[:, None]).T @ v

    d_metrics: List[np.ndarray] = []
    d_centers: List[np.ndarray] = []
    d_radii: List[float] = []
    for s, region in enumerate(model.regions):
        coef = weights * _half_ratio(terms.gammas[s], terms.lengths[s])
        d_metrics.append((v * coef[:, None]).T @ v)
        d_center, d_radius = batch_gamma_gradients(starts, ends, region.ball.center, region.ball.radius)
        factor = weights * (terms.lengths[s] - np.where(background_active, terms.length_background, 0.0))
        d_centers.append(factor @ d_center)
        d_radii.append(float(factor @ d_radius))
    return DistanceGradients(d_background_metric=d_background, d_metrics=d_metrics, d_centers=d_centers, d_radii=d_radii)


def composite_distance_with_grads(x_i: np.ndarray, x_j: np.ndarray, model: ModelParams) -> Tuple[float, DistanceGradients]:
    x_i, x_j = _check_pair(x_i, x_j, model)
    distance = float(pairwise_composite_distance(x_i[None, :], x_j[None, :], model)[0])
    return distance, weighted_distance_gradients(x_i[None, :], x_j[None, :], model)


def coverage(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> np.ndarray:
    """(S, n) fractions gamma_s of each segment inside each region."""
    starts, ends = _check_pairs(starts, ends, model)
    return _coverage(starts, ends, model)


# ----------- Private APIs  ------------------------------------------------------------

def _check_pairs(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    if starts.shape != ends.shape or starts.shape[1] != model.dim:
        logger.error(f"pair arrays {starts.shape} / {ends.shape} do not match model dimension {model.dim}")
        raise ConfigurationError(f"pair arrays {starts.shape} / {ends.shape} do not match model dimension {model.dim}")
    return starts, ends


def _coverage(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> np.ndarray:
    gammas = np.zeros((model.num_regions, starts.shape[0]))
    for s, region in enumerate(model.regions):
        gammas[s] = batch_intersection(starts, ends, region.ball.center, region.ball.radius).gamma
    return gammas


def _pair_terms(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> _PairTerms:
    starts, ends = _check_pairs(starts, ends, model)
    differences = starts - ends
    gammas = _coverage(starts, ends, model)
    lengths = np.zeros_like(gammas)
    for s, region in enumerate(model.regions):
        lengths[s] = _lengths(differences, region.metric)
    gamma_background = np.maximum(1.0 - np.sum(gammas, axis=0), 0.0)
    length_background = _lengths(differences, model.background_metric)
    return _PairTerms(differences, gammas, gamma_background, length_background, lengths)


def _lengths(differences: np.ndarray, metric: np.ndarray) -> np.ndarray:
    forms = np.einsum("nd,nd->n", differences @ metric, differences)
    if np.any(forms <= -NEGATIVE_FORM_TOLERANCE):
        logger.error(f"negative quadratic form {forms.min()}: metric is not PSD")
        raise ConfigurationError(f"negative quadratic form {forms.min()}: the metric is not positive semi-definite")
    return np.where(forms < ZERO_LENGTH_FORM, 0.0, np.sqrt(np.maximum(forms, 0.0)))


def _half_ratio(gamma: np.ndarray, length: np.ndarray) -> np.ndarray:
    """gamma / (2 L), 0 where L is 0."""
    positive = length > 0
    return np.where(positive, gamma / (2.0 * np.where(positive, length, 1.0)), 0.0)


def _check_pair(x_i, x_j, model: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != (model.dim,) or x_j.shape != (model.dim,):
        logger.error(f"points {x_i.shape} / {x_j.shape} do not match model dimension {model.dim}")
        raise ConfigurationError(f"points {x_i.shape} / {x_j.shape} do not match model dimension {model.dim}")
    return x_i, x_j
