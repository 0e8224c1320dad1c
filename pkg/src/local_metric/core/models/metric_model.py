"""
Copyright 2025 local-metric contributors
"""
from typing import Annotated, List, Optional
import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator


def _as_vector(value) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got an array of shape {v.shape}")
    return v

def _as_square_matrix(value) -> np.ndarray:
    m = np.asarray(value, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got an array of shape {m.shape}")
    return m

Vector = Annotated[np.ndarray, BeforeValidator(_as_vector)]
Matrix = Annotated[np.ndarray, BeforeValidator(_as_square_matrix)]


class Ball(BaseModel):
    """Influential region located with the Euclidean geometry."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    center: Vector
    radius: float = Field(gt=0, description="radius in feature units")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


class Segment(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
    start: Vector
    end: Vector

    @model_validator(mode="after")
    def check_endpoints(self) -> "Segment":
        if self.start.shape != self.end.shape:
            raise ValueError(f"segment endpoints differ in dimension: {self.start.shape} vs {self.end.shape}")
        if not (np.all(np.isfinite(self.start)) and np.all(np.isfinite(self.end))):
            raise ValueError("segment endpoints must be finite")
        return self

    @property
    def dim(self) -> int:
        return self.start.shape[0]


class IntersectionResult(BaseModel):
    """
    Coefficients of the quadratic |x_i + lambda (x_j - x_i) - o|^2 = r^2 for one segment/ball pair.
    lambda_u, lambda_v are only set when the line crosses the ball; lambda_p, lambda_q and gamma
    are filled by clamp_to_segment.
    """
    a: float
    b: float
    c: float
    delta: float
    intersects: bool = Field(default=False, description="delta above the tangent band and a > 0")
    lambda_u: Optional[float] = None
    lambda_v: Optional[float] = None
    lambda_p: Optional[float] = None
    lambda_q: Optional[float] = None
    gamma: Optional[float] = None


class InfluentialRegion(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)
    ball: Ball
    metric: Matrix


class ModelParams(BaseModel):
    """
    The learned parameters: the background metric M(B) and S influential regions,
    each with its ball and local metric M(A_s). S = 0 is plain Mahalanobis under M(B).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)
    background_metric: Matrix
    regions: List[InfluentialRegion] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_dimensions(self) -> "ModelParams":
        d = self.background_metric.shape[0]
        for s, region in enumerate(self.regions):
            if region.metric.shape != (d, d) or region.ball.dim != d:
                raise ValueError(f"region {s} does not match the background dimension {d}")
        return self

    @property
    def dim(self) -> int:
        return self.background_metric.shape[0]

    @property
    def num_regions(self) -> int:
        return len(self.regions)

    @classmethod
    def identity(cls, dim: int) -> "ModelParams":
        return cls(background_metric=np.eye(dim))

    def metrics(self) -> List[np.ndarray]:
        """Background metric first, then the local metrics in region order."""
        return [self.background_metric] + [r.metric for r in self.regions]


class DistanceGradients(BaseModel):
    """Gradients with respect to every parameter group of ModelParams, in the same layout."""
    model_config = ConfigDict(arbitrary_types_allowed=True)
    d_background_metric: Matrix
    d_metrics: List[Matrix] = Field(default_factory=list)
    d_centers: List[Vector] = Field(default_factory=list)
    d_radii: List[float] = Field(default_factory=list)

    @classmethod
    def zeros_like(cls, model: ModelParams) -> "DistanceGradients":
        d = model.dim
        return cls(d_background_metric=np.zeros((d, d)),
                   d_metrics=[np.zeros((d, d)) for _ in model.regions],
                   d_centers=[np.zeros(d) for _ in model.regions],
                   d_radii=[0.0 for _ in model.regions])

    def add(self, other: "DistanceGradients") -> "DistanceGradients":
        return DistanceGradients(d_background_metric=self.d_background_metric + other.d_background_metric,
                                 d_metrics=[a + b for a, b in zip(self.d_metrics, other.d_metrics)],
                                 d_centers=[a + b for a, b in zip(self.d_centers, other.d_centers)],
                                 d_radii=[a + b for a, b in zip(self.d_radii, other.d_radii)])

    def as_vector(self) -> np.ndarray:
        parts = [self.d_background_metric.ravel()]
        parts += [m.ravel() for m in self.d_metrics]
        parts += [c for c in self.d_centers]
        parts.append(np.asarray(self.d_radii, dtype=float))
        return np.concatenate(parts)
