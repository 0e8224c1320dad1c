"""
Copyright 2025 local-metric contributors

Finite difference check of the analytic gradients: gamma with respect to the ball, the
composite distance and the training objective with respect to every model parameter.
Configurations are drawn at random and kept only when they sit away from the case boundaries
where the functions are not differentiable.
"""
from typing import Callable, List, Optional, Sequence, Tuple
import numpy as np
from local_metric.core.distance_mgr import composite_from_coverage, coverage, pairwise_composite_distance, weighted_distance_gradients
from local_metric.core.geometry_mgr import batch_gamma_gradients, batch_intersection
from local_metric.core.models.dataset_model import LabeledDataset
from local_metric.core.models.metric_model import Ball, InfluentialRegion, ModelParams
from local_metric.core.models.training_model import PairSet, TrainConfig
from local_metric.core.trainer_mgr import build_target_pairs, objective_from_distances, objective_gradient
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.report_mgr import GradCheckReport, GradCheckResult

FD_STEP = 1e-6
KINK_MARGIN = 1e-3
ERROR_THRESHOLD = 1e-4
NORM_FLOOR = 1e-8
MAX_DRAWS = 1000
GROUPS = ("gamma", "distance", "objective")


# ----------- Public APIs  ------------------------------------------------------------

def relative_error(analytic: np.ndarray, numeric: np.ndarray, blocks: Sequence[slice] = ()) -> float:
    """
    |a - f| / max(|a|, |f|, 1e-8) computed on each block of the gradient vectors, the largest
    value is returned. Without blocks the whole vector is a single block.
    """
    worst = 0.0
    for block in blocks or (slice(None),):
        a, f = analytic[block], numeric[block]
        scale = max(np.linalg.norm(a), np.linalg.norm(f), NORM_FLOOR)
        worst = max(worst, float(np.linalg.norm(a - f) / scale))
    return worst


def parameter_blocks(dim: int, num_regions: int) -> List[slice]:
    """Blocks of the flat layout: each metric, each center, then all the radii together."""
    size = dim * dim
    blocks = [slice(size * m, size * (m + 1)) for m in range(num_regions + 1)]
    offset = size * (num_regions + 1)
    blocks += [slice(offset + dim * s, offset + dim * (s + 1)) for s in range(num_regions)]
    if num_regions:
        blocks.append(slice(offset + dim * num_regions, offset + (dim + 1) * num_regions))
    return blocks


def finite_difference(func: Callable[[np.ndarray], float], x0: np.ndarray, eps: float = FD_STEP,
                      symmetric_blocks: Sequence[Tuple[int, int]] = ()) -> np.ndarray:
    """
    Centered finite differences of func at x0. symmetric_blocks lists (offset, size) of flattened
    symmetric matrices inside x0: only their upper triangle is perturbed, an off diagonal entry
    (i, j) moving together with (j, i) by eps / 2 each, which matches the gradient of a function
    of a symmetric matrix.
    """
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    mirrored = {}
    for offset, size in symmetric_blocks:
        for i in range(size):
            for j in range(i + 1, size):
                mirrored[offset + i * size + j] = offset + j * size + i
    skipped = set(mirrored.values())
    shifted = x0.copy()
    for k in range(x0.shape[0]):
        if k in skipped:
            continue
        moved = [k] if k not in mirrored else [k, mirrored[k]]
        step = eps if len(moved) == 1 else eps / 2
        shifted[moved] = x0[moved] + step
        upper = func(shifted)
        shifted[moved] = x0[moved] - step
        lower = func(shifted)
        shifted[moved] = x0[moved]
        grad[moved] = (upper - lower) / (2 * eps)
    return grad


def flatten_model(model: ModelParams) -> np.ndarray:
    """Same layout as DistanceGradients.as_vector: M_B, M_1..M_S, o_1..o_S, r_1..r_S."""
    parts = [m.ravel() for m in model.metrics()]
    parts += [r.ball.center for r in model.regions]
    parts.append(np.asarray([r.ball.radius for r in model.regions], dtype=float))
    return np.concatenate(parts)


def unflatten_model(vector: np.ndarray, dim: int, num_regions: int) -> ModelParams:
    metrics, centers, radii = _split(vector, dim, num_regions)
    return ModelParams(background_metric=metrics[0],
                       regions=[InfluentialRegion(ball=Ball(center=centers[s], radius=float(radii[s])), metric=metrics[s + 1])
                                for s in range(num_regions)])


def check_gamma_gradients(rng: np.random.Generator, dim: int, configurations: int) -> Tuple[float, int]:
    worst, checked = 0.0, 0
    blocks = [slice(0, dim), slice(dim, dim + 1)]
    for _ in range(configurations):
        sample = _draw(lambda: _gamma_configuration(rng, dim))
        if sample is None:
            continue
        start, end, center, radius = sample
        d_center, d_radius = batch_gamma_gradients(start[None, :], end[None, :], center, radius)
        analytic = np.concatenate([d_center[0], d_radius])

        def gamma_at(theta: np.ndarray) -> float:
            return float(batch_intersection(start[None, :], end[None, :], theta[:dim], theta[dim]).gamma[0])

        numeric = finite_difference(gamma_at, np.concatenate([center, [radius]]))
        worst = max(worst, relative_error(analytic, numeric, blocks))
        checked += 1
    return worst, checked


def check_distance_gradients(rng: np.random.Generator, dim: int, configurations: int, num_regions: int = 2) -> Tuple[float, int]:
    worst, checked = 0.0, 0
    blocks = parameter_blocks(dim, num_regions)
    for _ in range(configurations):
        sample = _draw(lambda: _distance_configuration(rng, dim, num_regions))
        if sample is None:
            continue
        start, end, model = sample
        analytic = weighted_distance_gradients(start[None, :], end[None, :], model).as_vector()
        starts, ends = start[None, :], end[None, :]
        differences = starts - ends
        coverage_at = _CoverageCache(starts, ends, dim, num_regions)

        def distance_at(theta: np.ndarray) -> float:
            metrics, _, _ = _split(theta, dim, num_regions)
            return float(composite_from_coverage(differences, coverage_at(theta), metrics[0], metrics[1:])[0])

        numeric = finite_difference(distance_at, flatten_model(model), symmetric_blocks=_metric_blocks(dim, num_regions))
        worst = max(worst, relative_error(analytic, numeric, blocks))
        checked += 1
    return worst, checked


def check_objective_gradients(rng: np.random.Generator, dim: int, configurations: int,
                              num_regions: int = 2, num_points: int = 16) -> Tuple[float, int]:
    worst, checked = 0.0, 0
    config = TrainConfig(alpha=0.1, margin_c=0.5, k_neighbors=3, num_regions=num_regions)
    blocks = parameter_blocks(dim, num_regions)
    for _ in range(configurations):
        sample = _draw(lambda: _objective_configuration(rng, dim, num_regions, num_points, config))
        if sample is None:
            continue
        trainset, pairs, model = sample
        analytic = objective_gradient(model, trainset, pairs, config).as_vector()
        pair_index = np.asarray(pairs.similar + pairs.dissimilar)
        starts, ends = trainset.instances[pair_index[:, 0]], trainset.instances[pair_index[:, 1]]
        differences = starts - ends
        coverage_at = _CoverageCache(starts, ends, dim, num_regions)

        def objective_at(theta: np.ndarray) -> float:
            metrics, _, _ = _split(theta, dim, num_regions)
            distances = composite_from_coverage(differences, coverage_at(theta), metrics[0], metrics[1:])
            return objective_from_distances(distances[:pairs.n1], distances[pairs.n1:], metrics, config)

        numeric = finite_difference(objective_at, flatten_model(model), symmetric_blocks=_metric_blocks(dim, num_regions))
        worst = max(worst, relative_error(analytic, numeric, blocks))
        checked += 1
    return worst, checked


def run_gradient_check(dims: Sequence[int] = (2, 8, 30),
                       configurations: int = 50,
                       seed: int = 0,
                       threshold: float = ERROR_THRESHOLD,
                       groups: Sequence[str] = GROUPS) -> GradCheckReport:
    """One result per (group, dimension); each group and dimension gets its own seeded stream."""
    checks = {"gamma": check_gamma_gradients, "distance": check_distance_gradients, "objective": check_objective_gradients}
    results: List[GradCheckResult] = []
    for g, group in enumerate(groups):
        for dim in dims:
            rng = np.random.default_rng([seed, g, dim])
            worst, checked = checks[group](rng, dim, configurations)
            passed = checked > 0 and worst < threshold
            logger.info(f"gradcheck {group} d={dim}: {checked} configurations, max relative error {worst:.3e}")
            results.append(GradCheckResult(group=group, dim=dim, configurations=checked,
                                           max_relative_error=worst, threshold=threshold, passed=passed))
    return GradCheckReport(seed=seed, results=results)


# ----------- Private APIs  ------------------------------------------------------------

class _CoverageCache:
    """Coverage of a fixed set of pairs, recomputed only when a center or a radius moved."""

    def __init__(self, starts: np.ndarray, ends: np.ndarray, dim: int, num_regions: int):
        self.starts = starts
        self.ends = ends
        self.dim = dim
        self.num_regions = num_regions
        self.offset = dim * dim * (num_regions + 1)
        self.key: Optional[bytes] = None
        self.gammas = np.zeros((num_regions, starts.shape[0]))

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        key = theta[self.offset:].tobytes()
        if key != self.key:
            _, centers, radii = _split(theta, self.dim, self.num_regions)
            for s in range(self.num_regions):
                self.gammas[s] = batch_intersection(self.starts, self.ends, centers[s], float(radii[s])).gamma
            self.key = key
        return self.gammas


def _split(vector: np.ndarray, dim: int, num_regions: int) -> Tuple[List[np.ndarray], List[np.ndarray], np.ndarray]:
    size = dim * dim
    metrics = [vector[size * m:size * (m + 1)].reshape(dim, dim) for m in range(num_regions + 1)]
    offset = size * (num_regions + 1)
    centers = [vector[offset + dim * s:offset + dim * (s + 1)] for s in range(num_regions)]
    radii = vector[offset + dim * num_regions:]
    return metrics, centers, radii


def _draw(sampler: Callable[[], Optional[tuple]]) -> Optional[tuple]:
    for _ in range(MAX_DRAWS):
        sample = sampler()
        if sample is not None:
            return sample
    logger.warning(f"No kink-free configuration found in {MAX_DRAWS} draws")
    return None


def _metric_blocks(dim: int, num_regions: int) -> List[Tuple[int, int]]:
    return [(dim * dim * m, dim) for m in range(num_regions + 1)]


def _pair_margin(starts: np.ndarray, ends: np.ndarray, model: ModelParams) -> float:
    """Smallest distance to a kink over all pairs and regions."""
    margin = np.inf
    for region in model.regions:
        inter = batch_intersection(starts, ends, region.ball.center, region.ball.radius)
        hit = inter.intersects
        scale = np.maximum.reduce([np.ones_like(inter.b), inter.b ** 2, np.abs(4 * inter.a * inter.c)])
        kinks = np.where(hit, np.inf, np.maximum(-inter.delta, 0.0) / scale)
        if np.any(hit):
            lu, lv = inter.lambda_u[hit], inter.lambda_v[hit]
            kinks[hit] = np.min(np.abs(np.stack([lu, lv, 1 - lu, 1 - lv, lv - lu])), axis=0)
        margin = min(margin, float(np.min(kinks)))
    if model.num_regions:
        margin = min(margin, float(np.min(np.abs(1.0 - coverage(starts, ends, model).sum(axis=0)))))
    return margin


def _random_metric(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim))
    return a @ a.T / dim + 0.5 * np.eye(dim)


def _unit_points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    points = rng.normal(size=(count, dim))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def _gamma_configuration(rng: np.random.Generator, dim: int):
    start, end = rng.normal(size=dim), rng.normal(size=dim)
    direction = end - start
    length = np.linalg.norm(direction)
    center = start + rng.uniform(-0.5, 1.5) * direction + rng.normal(scale=0.3 * length / np.sqrt(dim), size=dim)
    radius = length * rng.uniform(0.1, 1.2)
    model = ModelParams(background_metric=np.eye(dim),
                        regions=[InfluentialRegion(ball=Ball(center=center, radius=radius), metric=np.eye(dim))])
    inter = batch_intersection(start[None, :], end[None, :], center, radius)
    if not inter.intersects[0] or _pair_margin(start[None, :], end[None, :], model) < KINK_MARGIN:
        return None
    return start, end, center, radius


def _distance_configuration(rng: np.random.Generator, dim: int, num_regions: int):
    start, end = _unit_points(rng, 2, dim)
    direction = end - start
    regions = []
    for _ in range(num_regions):
        center = start + rng.uniform(-0.2, 1.2) * direction + rng.normal(scale=0.2 / np.sqrt(dim), size=dim)
        radius = float(np.linalg.norm(direction) * rng.uniform(0.1, 0.6))
        regions.append(InfluentialRegion(ball=Ball(center=center, radius=radius), metric=_random_metric(rng, dim)))
    model = ModelParams(background_metric=_random_metric(rng, dim), regions=regions)
    if _pair_margin(start[None, :], end[None, :], model) < KINK_MARGIN:
        return None
    return start, end, model


def _objective_configuration(rng: np.random.Generator, dim: int, num_regions: int, num_points: int, config: TrainConfig):
    instances = _unit_points(rng, num_points, dim)
    labels = np.where(np.arange(num_points) % 2 == 0, 1, -1)
    trainset = LabeledDataset(instances=instances, labels=labels, name="gradcheck")
    pairs: PairSet = build_target_pairs(trainset, config.k_neighbors)
    regions = []
    for s in range(num_regions):
        center = instances[rng.integers(num_points)] + rng.normal(scale=0.2 / np.sqrt(dim), size=dim)
        regions.append(InfluentialRegion(ball=Ball(center=center, radius=float(rng.uniform(0.3, 0.8))),
                                         metric=_random_metric(rng, dim)))
    model = ModelParams(background_metric=_random_metric(rng, dim), regions=regions)
    pair_index = np.asarray(pairs.similar + pairs.dissimilar)
    starts, ends = instances[pair_index[:, 0]], instances[pair_index[:, 1]]
    if _pair_margin(starts, ends, model) < KINK_MARGIN:
        return None
    distances = pairwise_composite_distance(starts, ends, model)
    similar_args = distances[:pairs.n1] - (1.0 - config.margin_c)
    dissimilar_args = (1.0 + config.margin_c) - distances[pairs.n1:]
    if np.min(np.abs(np.concatenate([similar_args, dissimilar_args]))) < KINK_MARGIN:
        return None
    return trainset, pairs, model
