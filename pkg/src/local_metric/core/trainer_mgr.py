"""
Copyright 2025 local-metric contributors

Learning the influential regions and their metrics:
- target pairs from the Euclidean K nearest neighbors, computed once and kept for the run
- initialization by k-means on the features augmented with the local discriminative direction
- hinge objective with Frobenius regularization and its gradient
- full batch gradient descent with PSD projection and radius clamping
"""
import math
from typing import Final, List, Optional, Sequence
import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans
from local_metric.core.distance_mgr import pairwise_composite_distance, weighted_distance_gradients
from local_metric.core.metric_mgr import check_model_invariants, frobenius_norm, project_psd, symmetrize
from local_metric.core.models.dataset_model import LabeledDataset
from local_metric.core.models.metric_model import Ball, DistanceGradients, InfluentialRegion, ModelParams
from local_metric.core.models.training_model import PairSet, TrainConfig, TrainReport
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError, DataFormatError, NumericalError

STOPPING_WINDOW: Final[int] = 10
KMEANS_RESTARTS: Final[int] = 10
KMEANS_MAX_ITER: Final[int] = 100
KMEANS_TOL: Final[float] = 1e-6
RADIUS_PERCENTILE: Final[float] = 80.0
INIT_METRIC_SCALE: Final[float] = 0.1
ZERO_NORM: Final[float] = 1e-12


# ----------- Public APIs  ------------------------------------------------------------

def build_target_pairs(trainset: LabeledDataset, k: int) -> PairSet:
    """
    Similar pairs (i, j): x_j is one of the K nearest same-class neighbors of x_i.
    Dissimilar pairs (m, n): x_m is one of the K nearest other-class neighbors of x_n.
    Euclidean distances, equal distances resolved by the lower index.
    """
    if k < 1:
        raise ConfigurationError(f"K must be positive, got {k}")
    _check_both_classes(trainset)
    distances = cdist(trainset.instances, trainset.instances, metric="euclidean")
    similar = []
    dissimilar = []
    for i in range(trainset.size):
        same = trainset.class_indices(trainset.labels[i])
        same = same[same != i]
        for j in _nearest(distances[i], same, k):
            similar.append((i, int(j)))
    for n in range(trainset.size):
        other = trainset.class_indices(-trainset.labels[n])
        for m in _nearest(distances[n], other, k):
            dissimilar.append((int(m), n))
    logger.info(f"Built {len(similar)} similar and {len(dissimilar)} dissimilar pairs with K={k} on {trainset.size} instances")
    return PairSet(similar=similar, dissimilar=dissimilar)


def discriminative_direction(trainset: LabeledDataset, k: int, pairs: Optional[PairSet] = None) -> np.ndarray:
    """
    Per instance, per feature: total absolute offset to the K other-class neighbors minus the
    total absolute offset to the K same-class neighbors. Large entries mark features that
    separate the classes around that instance.
    """
    pairs = pairs or build_target_pairs(trainset, k)
    x = trainset.instances
    direction = np.zeros_like(x)
    if pairs.n1:
        similar = np.asarray(pairs.similar)
        np.subtract.at(direction, similar[:, 0], np.abs(x[similar[:, 1]] - x[similar[:, 0]]))
    if pairs.n2:
        dissimilar = np.asarray(pairs.dissimilar)
        np.add.at(direction, dissimilar[:, 1], np.abs(x[dissimilar[:, 0]] - x[dissimilar[:, 1]]))
    return direction


def initialize_model(trainset: LabeledDataset, config: TrainConfig, pairs: Optional[PairSet] = None) -> ModelParams:
    """
    Clusters [x, h(x)] into S groups with k-means. Each group gives one region: its center is the
    mean of the members' features, its radius the 80th percentile of the member distances to the
    center and its metric I + 0.1 diag(mean h). The background metric starts at I.
    """
    num_regions = config.num_regions
    if num_regions > trainset.size:
        logger.error(f"{num_regions} regions requested for {trainset.size} instances")
        raise ConfigurationError(f"cannot build {num_regions} regions from {trainset.size} instances")
    model = ModelParams.identity(trainset.dim)
    if num_regions == 0:
        return model
    direction = discriminative_direction(trainset, config.k_neighbors, pairs)
    assignments = _cluster(np.hstack([trainset.instances, direction]), num_regions, config.seed)
    regions = []
    for s in range(num_regions):
        members = np.flatnonzero(assignments == s)
        if members.size == 0:
            logger.warning(f"Dropping region {s}: its cluster stayed empty after {KMEANS_RESTARTS} restarts")
            continue
        points = trainset.instances[members]
        center = points.mean(axis=0)
        radius = float(np.percentile(np.linalg.norm(points - center, axis=1), RADIUS_PERCENTILE))
        radius = max(radius, config.radius_floor)
        metric = project_psd(np.eye(trainset.dim) + INIT_METRIC_SCALE * np.diag(direction[members].mean(axis=0)))
        regions.append(InfluentialRegion(ball=Ball(center=center, radius=radius), metric=metric))
        logger.debug(f"Region {s}: {members.size} members, radius {radius:.4f}")
    return ModelParams(background_metric=model.background_metric, regions=regions)


def objective(model: ModelParams, trainset: LabeledDataset, pairs: PairSet, config: TrainConfig) -> float:
    """
    g = mean over similar pairs of [D - (1 - C)]+  + mean over dissimilar pairs of [1 + C - D]+
        + alpha * (sum of the Frobenius norms of all metrics)
    """
    similar_distances, dissimilar_distances = _pair_distances(model, trainset, pairs)
    return objective_from_distances(similar_distances, dissimilar_distances, model.metrics(), config)


def objective_from_distances(similar_distances: np.ndarray,
                             dissimilar_distances: np.ndarray,
                             metrics: Sequence[np.ndarray],
                             config: TrainConfig) -> float:
    """Objective value once the composite distances of the similar and dissimilar pairs are known."""
    value = 0.0
    if similar_distances.size:
        value += float(np.sum(np.maximum(similar_distances - (1.0 - config.margin_c), 0.0))) / similar_distances.size
    if dissimilar_distances.size:
        value += float(np.sum(np.maximum((1.0 + config.margin_c) - dissimilar_distances, 0.0))) / dissimilar_distances.size
    value += config.alpha * sum(frobenius_norm(m) for m in metrics)
    return value


def objective_gradient(model: ModelParams, trainset: LabeledDataset, pairs: PairSet, config: TrainConfig) -> DistanceGradients:
    """
    Active similar pairs pull with weight +1/N1, active dissimilar pairs push with weight -1/N2;
    a pair is active when its hinge argument is strictly positive. The regularizer adds
    alpha * M / |M|_F to every metric with a non zero norm.
    """
    similar_hinges, dissimilar_hinges = _hinge_arguments(model, trainset, pairs, config)
    x = trainset.instances
    grads = DistanceGradients.zeros_like(model)
    if pairs.n1:
        similar = np.asarray(pairs.similar)[similar_hinges > 0]
        weights = np.full(similar.shape[0], 1.0 / pairs.n1)
        grads = grads.add(weighted_distance_gradients(x[similar[:, 0]], x[similar[:, 1]], model, weights))
    if pairs.n2:
        dissimilar = np.asarray(pairs.dissimilar)[dissimilar_hinges > 0]
        weights = np.full(dissimilar.shape[0], -1.0 / pairs.n2)
        grads = grads.add(weighted_distance_gradients(x[dissimilar[:, 0]], x[dissimilar[:, 1]], model, weights))
    if config.alpha > 0:
        grads = grads.add(_shrinkage(model, config.alpha))
    return grads


def apply_gradient_step(model: ModelParams, grads: DistanceGradients, learning_rate: float, radius_floor: float) -> ModelParams:
    """One descent step followed by the projections: metrics back in the PSD cone, radii >= floor."""
    background = project_psd(symmetrize(model.background_metric - learning_rate * grads.d_background_metric))
    regions = []
    for s, region in enumerate(model.regions):
        metric = project_psd(symmetrize(region.metric - learning_rate * grads.d_metrics[s]))
        center = region.ball.center - learning_rate * grads.d_centers[s]
        radius = max(region.ball.radius - learning_rate * grads.d_radii[s], radius_floor)
        regions.append(InfluentialRegion(ball=Ball(center=center, radius=radius), metric=metric))
    return ModelParams(background_metric=background, regions=regions)


def train(trainset: LabeledDataset, config: TrainConfig) -> TrainReport:
    """
    Full batch gradient descent from the k-means initialization. Stops after max_epochs or when
    the objective moved less than tol (relative) over the last 10 epochs.
    """
    logger.info(f"Training on {trainset.name}: n={trainset.size}, d={trainset.dim}, config={config.model_dump()}")
    pairs = build_target_pairs(trainset, config.k_neighbors)
    model = initialize_model(trainset, config, pairs)
    history: List[float] = [_checked_objective(model, trainset, pairs, config, 0)]
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        grads = objective_gradient(model, trainset, pairs, config)
        if not np.all(np.isfinite(grads.as_vector())):
            logger.error(f"Epoch {epoch}: non-finite gradient with learning rate {config.learning_rate}")
            raise NumericalError(f"gradient became non-finite at epoch {epoch}; try a smaller learning rate")
        try:
            model = apply_gradient_step(model, grads, config.learning_rate, config.radius_floor)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.error(f"Epoch {epoch}: gradient step failed: {e}")
            raise NumericalError(f"gradient step failed at epoch {epoch}: {e}; try a smaller learning rate") from e
        violations = check_model_invariants(model, config.radius_floor)
        if violations:
            logger.error(f"Epoch {epoch}: model invariants violated: {violations}")
            raise NumericalError(f"model invariants violated at epoch {epoch}: {'; '.join(violations)}")
        history.append(_checked_objective(model, trainset, pairs, config, epoch))
        epochs_run = epoch
        logger.debug(f"Epoch {epoch}: objective {history[-1]:.8f}")
        if _converged(history, config.tol):
            logger.info(f"Converged after {epoch} epochs")
            break
    logger.info(f"Objective {history[0]:.6f} -> {history[-1]:.6f} in {epochs_run} epochs")
    return TrainReport(objective_history=history, final_model=model, epochs_run=epochs_run, config=config)


# ----------- Private APIs  ------------------------------------------------------------

def _check_both_classes(trainset: LabeledDataset):
    for label in (-1, 1):
        if trainset.class_indices(label).size == 0:
            logger.error(f"train set {trainset.name} has no instance with label {label}")
            raise DataFormatError(f"the train set has no instance with label {label}")


def _nearest(row: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    # candidates come in ascending index order, the stable sort keeps it for equal distances
    return candidates[np.argsort(row[candidates], kind="stable")[:k]]


def _cluster(features: np.ndarray, num_clusters: int, seed: int) -> np.ndarray:
    assignments = None
    for attempt in range(KMEANS_RESTARTS):
        kmeans = KMeans(n_clusters=num_clusters,
                        init="k-means++",
                        n_init=1,
                        max_iter=KMEANS_MAX_ITER,
                        tol=KMEANS_TOL,
                        random_state=seed + attempt,
                        algorithm="lloyd")
        assignments = kmeans.fit_predict(features)
        if np.all(np.bincount(assignments, minlength=num_clusters) > 0):
            return assignments
        logger.warning(f"k-means attempt {attempt} left an empty cluster, re-seeding")
    return assignments


def _pair_distances(model: ModelParams, trainset: LabeledDataset, pairs: PairSet):
    x = trainset.instances
    similar_distances = np.zeros(0)
    dissimilar_distances = np.zeros(0)
    if pairs.n1:
        similar = np.asarray(pairs.similar)
        similar_distances = pairwise_composite_distance(x[similar[:, 0]], x[similar[:, 1]], model)
    if pairs.n2:
        dissimilar = np.asarray(pairs.dissimilar)
        dissimilar_distances = pairwise_composite_distance(x[dissimilar[:, 0]], x[dissimilar[:, 1]], model)
    return similar_distances, dissimilar_distances


def _hinge_arguments(model: ModelParams, trainset: LabeledDataset, pairs: PairSet, config: TrainConfig):
    similar_distances, dissimilar_distances = _pair_distances(model, trainset, pairs)
    return similar_distances - (1.0 - config.margin_c), (1.0 + config.margin_c) - dissimilar_distances


def _shrinkage(model: ModelParams, alpha: float) -> DistanceGradients:
    def term(metric: np.ndarray) -> np.ndarray:
        norm = frobenius_norm(metric)
        if norm <= ZERO_NORM:
            return np.zeros_like(metric)
        return alpha * metric / norm
    grads = DistanceGradients.zeros_like(model)
    return grads.model_copy(update={"d_background_metric": term(model.background_metric),
                                    "d_metrics": [term(r.metric) for r in model.regions]})


def _checked_objective(model: ModelParams, trainset: LabeledDataset, pairs: PairSet, config: TrainConfig, epoch: int) -> float:
    value = objective(model, trainset, pairs, config)
    if not math.isfinite(value):
        logger.error(f"Objective is {value} at epoch {epoch} with learning rate {config.learning_rate}")
        raise NumericalError(f"objective became {value} at epoch {epoch}; try a smaller learning rate")
    return value


def _converged(history: List[float], tol: float) -> bool:
    if len(history) <= STOPPING_WINDOW:
        return False
    previous = history[-1 - STOPPING_WINDOW]
    return abs(previous - history[-1]) / max(abs(previous), ZERO_NORM) < tol
