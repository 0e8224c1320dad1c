"""
Copyright 2025 local-metric contributors

Segment / ball intersection: where the segment x_i -> x_j enters and leaves an influential
region, the fraction gamma of the segment inside it, and the derivatives of gamma with respect
to the ball center and radius.

All functions come in two flavors: a scalar one working on pydantic Segment / Ball values and a
batch one working on (n, d) arrays of segment endpoints against one ball. The scalar functions
delegate to the batch ones so both always agree.
"""
import math
from typing import Final, NamedTuple, Tuple
import numpy as np
from local_metric.core.models.metric_model import Ball, IntersectionResult, Segment
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError

DELTA_BAND: Final[float] = 1e-12

CASE_DEGENERATE: Final[str] = "a=0"
CASE_NO_INTERSECTION: Final[str] = "Δ<0"
CASE_TANGENT: Final[str] = "Δ=0"
CASE_BEFORE_START: Final[str] = "λ_u<0, λ_v<0"
CASE_COVERS_START: Final[str] = "λ_u<0, 0≤λ_v≤1"
CASE_COVERS_SEGMENT: Final[str] = "λ_u<0, λ_v>1"
CASE_INSIDE_SEGMENT: Final[str] = "0≤λ_u≤1, 0≤λ_v≤1"
CASE_COVERS_END: Final[str] = "0≤λ_u≤1, λ_v>1"
CASE_AFTER_END: Final[str] = "λ_u>1, λ_v>1"

TABLE_CASES: Final[Tuple[str, ...]] = (CASE_NO_INTERSECTION, CASE_TANGENT, CASE_BEFORE_START, CASE_COVERS_START,
                                       CASE_COVERS_SEGMENT, CASE_INSIDE_SEGMENT, CASE_COVERS_END, CASE_AFTER_END)


class BatchIntersection(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    delta: np.ndarray
    intersects: np.ndarray
    lambda_u: np.ndarray  # nan where the line misses the ball
    lambda_v: np.ndarray
    lambda_p: np.ndarray
    lambda_q: np.ndarray
    gamma: np.ndarray


# ----------- Public APIs  ------------------------------------------------------------

def batch_intersection(starts: np.ndarray, ends: np.ndarray, center: np.ndarray, radius: float) -> BatchIntersection:
    """
    Intersection coefficients for n segments starts[k] -> ends[k] against one ball.
    A segment crosses the ball when a > 0 and delta > 1e-12 * max(1, b^2); tangent lines,
    misses and degenerate segments (x_i = x_j) get gamma = 0 and lambda_p = lambda_q = 0 whatever
    the direction of the segment.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    direction = ends - starts
    offset = starts - np.asarray(center, dtype=float)
    a = np.einsum("nd,nd->n", direction, direction)
    b = 2.0 * np.einsum("nd,nd->n", direction, offset)
    c = np.einsum("nd,nd->n", offset, offset) - radius * radius
    delta = b * b - 4.0 * a * c
    intersects = (a > 0) & (delta > DELTA_BAND * np.maximum(1.0, b * b))

    sqrt_delta = np.sqrt(np.where(intersects, delta, 0.0))
    # numerically stable roots: q = -(b + sign(b) sqrt(delta)) / 2, roots q / a and c / q
    half = -0.5 * (b + np.copysign(sqrt_delta, b))
    safe_a = np.where(intersects, a, 1.0)
    safe_half = np.where(intersects & (half != 0), half, 1.0)
    root_1 = half / safe_a
    root_2 = np.where(half != 0, c / safe_half, root_1)
    lambda_u = np.where(intersects, np.minimum(root_1, root_2), np.nan)
    lambda_v = np.where(intersects, np.maximum(root_1, root_2), np.nan)

    lambda_p = np.where(intersects, np.clip(np.nan_to_num(lambda_u), 0.0, 1.0), 0.0)
    lambda_q = np.where(intersects, np.clip(np.nan_to_num(lambda_v), 0.0, 1.0), 0.0)
    gamma = lambda_q - lambda_p
    return BatchIntersection(a, b, c, delta, intersects, lambda_u, lambda_v, lambda_p, lambda_q, gamma)


def batch_gamma_gradients(starts: np.ndarray, ends: np.ndarray, center: np.ndarray, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradients of gamma with respect to the ball center (n, d) and radius (n,).
    Only the three cases where gamma moves with the ball have a non zero gradient:
      0 < lambda_u, lambda_v < 1   gamma = lambda_v - lambda_u
      lambda_u < 0 < lambda_v < 1  gamma = lambda_v
      0 < lambda_u < 1 < lambda_v  gamma = 1 - lambda_u
    Case boundaries (lambda exactly 0 or 1, tangent band) take the zero subgradient.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    center = np.asarray(center, dtype=float)
    inter = batch_intersection(starts, ends, center, radius)
    lu = np.nan_to_num(inter.lambda_u)
    lv = np.nan_to_num(inter.lambda_v)
    hit = inter.intersects
    inside = hit & (lu > 0) & (lv < 1)
    covers_start = hit & (lu < 0) & (lv > 0) & (lv < 1)
    covers_end = hit & (lu > 0) & (lu < 1) & (lv > 1)

    direction = ends - starts
    a = np.where(hit, inter.a, 1.0)
    inv_sqrt_delta = np.where(hit, 1.0 / np.sqrt(np.where(hit, inter.delta, 1.0)), 0.0)
    # d(delta)/d(center) = -4 b (x_j - x_i) - 8 a (o - x_i)
    d_delta = -4.0 * inter.b[:, None] * direction - 8.0 * a[:, None] * (center[None, :] - starts)

    d_center = np.zeros_like(direction)
    d_radius = np.zeros(direction.shape[0])

    mid_point = starts + (-inter.b / (2.0 * a))[:, None] * direction
    d_center = np.where(inside[:, None], 4.0 * inv_sqrt_delta[:, None] * (mid_point - center[None, :]), d_center)
    d_radius = np.where(inside, 4.0 * inv_sqrt_delta * radius, d_radius)

    half_d_sqrt = 0.5 * inv_sqrt_delta[:, None] * d_delta
    d_center = np.where(covers_start[:, None], (2.0 * direction + half_d_sqrt) / (2.0 * a[:, None]), d_center)
    d_center = np.where(covers_end[:, None], (-2.0 * direction + half_d_sqrt) / (2.0 * a[:, None]), d_center)
    d_radius = np.where(covers_start | covers_end, 2.0 * inv_sqrt_delta * radius, d_radius)
    return d_center, d_radius


def line_ball_coefficients(segment: Segment, ball: Ball) -> IntersectionResult:
    """Quadratic coefficients, discriminant and line coefficients lambda_u <= lambda_v."""
    _check_dimensions(segment, ball)
    inter = batch_intersection(segment.start[None, :], segment.end[None, :], ball.center, ball.radius)
    hit = bool(inter.intersects[0])
    return IntersectionResult(a=float(inter.a[0]),
                              b=float(inter.b[0]),
                              c=float(inter.c[0]),
                              delta=float(inter.delta[0]),
                              intersects=hit,
                              lambda_u=float(inter.lambda_u[0]) if hit else None,
                              lambda_v=float(inter.lambda_v[0]) if hit else None)


def clamp_to_segment(result: IntersectionResult) -> IntersectionResult:
    """
    Fill lambda_p, lambda_q and gamma by clamping the line coefficients to [0, 1].
    Swapping the endpoints of a segment crossing the ball maps (lambda_p, lambda_q) to
    (1 - lambda_q, 1 - lambda_p). Misses, tangent lines and degenerate segments keep (0, 0)
    in both directions, so the mirror relation only covers crossing segments.
    """
    if result.lambda_u is None or result.lambda_v is None:
        return result.model_copy(update={"lambda_p": 0.0, "lambda_q": 0.0, "gamma": 0.0})
    lambda_p = min(max(result.lambda_u, 0.0), 1.0)
    lambda_q = min(max(result.lambda_v, 0.0), 1.0)
    return result.model_copy(update={"lambda_p": lambda_p, "lambda_q": lambda_q, "gamma": lambda_q - lambda_p})


def intersection(segment: Segment, ball: Ball) -> IntersectionResult:
    return clamp_to_segment(line_ball_coefficients(segment, ball))


def gamma_gradients(segment: Segment, ball: Ball) -> Tuple[np.ndarray, float]:
    _check_dimensions(segment, ball)
    d_center, d_radius = batch_gamma_gradients(segment.start[None, :], segment.end[None, :], ball.center, ball.radius)
    return d_center[0], float(d_radius[0])


def table_case(result: IntersectionResult) -> str:
    """Name of the intersection case a segment/ball pair falls in."""
    if result.a <= 0:
        return CASE_DEGENERATE
    if result.lambda_u is None or result.lambda_v is None:
        if result.delta < -DELTA_BAND * max(1.0, result.b * result.b):
            return CASE_NO_INTERSECTION
        return CASE_TANGENT
    lu, lv = result.lambda_u, result.lambda_v
    if lu < 0:
        if lv < 0:
            return CASE_BEFORE_START
        return CASE_COVERS_START if lv <= 1 else CASE_COVERS_SEGMENT
    if lu <= 1:
        return CASE_INSIDE_SEGMENT if lv <= 1 else CASE_COVERS_END
    return CASE_AFTER_END


def kink_margin(result: IntersectionResult) -> float:
    """
    How far a pair is from a case boundary, where gamma is not differentiable.
    Misses are measured by the relative size of the discriminant, crossings by the distance
    of lambda_u, lambda_v to 0 and 1 and to each other.
    """
    if result.a <= 0:
        return math.inf
    if result.lambda_u is None or result.lambda_v is None:
        scale = max(1.0, result.b * result.b, abs(4.0 * result.a * result.c))
        return max(-result.delta, 0.0) / scale
    lu, lv = result.lambda_u, result.lambda_v
    return min(abs(lu), abs(lv), abs(1.0 - lu), abs(1.0 - lv), lv - lu)


# ----------- Private APIs  ------------------------------------------------------------

def _check_dimensions(segment: Segment, ball: Ball):
    if segment.dim != ball.dim:
        logger.error(f"segment dimension {segment.dim} does not match ball dimension {ball.dim}")
        raise ConfigurationError(f"segment dimension {segment.dim} does not match ball dimension {ball.dim}")
