"""
Copyright 2025 local-metric contributors
"""
from typing import List, Tuple
import math
from pydantic import BaseModel, ConfigDict, Field, field_validator
from local_metric.core.models.metric_model import ModelParams


class TrainConfig(BaseModel):
    alpha: float = Field(default=0.1, ge=0, description="weight of the Frobenius regularization")
    margin_c: float = Field(default=0.5, ge=0, lt=1, description="margin constant C")
    k_neighbors: int = Field(default=10, ge=1, description="K for target pairs and the classifier")
    num_regions: int = Field(default=4, ge=0, description="number of influential regions S")
    learning_rate: float = Field(default=0.01, ge=0, description="gradient step beta, 0 keeps the initialization")
    max_epochs: int = Field(default=200, ge=0)
    tol: float = Field(default=1e-5, ge=0, description="relative objective change over a 10 epoch window")
    seed: int = Field(default=0, ge=0)
    radius_floor: float = Field(default=1e-3, gt=0)


class PairSet(BaseModel):
    """
    similar: (i, j) with x_j among the K same-class nearest neighbors of x_i.
    dissimilar: (m, n) with x_m among the K other-class nearest neighbors of x_n.
    """
    similar: List[Tuple[int, int]] = Field(default_factory=list)
    dissimilar: List[Tuple[int, int]] = Field(default_factory=list)

    @property
    def n1(self) -> int:
        return len(self.similar)

    @property
    def n2(self) -> int:
        return len(self.dissimilar)


class TrainReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)
    objective_history: List[float] = Field(default_factory=list, description="entry 0 is the initial model, entry t after epoch t")
    final_model: ModelParams
    epochs_run: int = 0
    config: TrainConfig = Field(default_factory=TrainConfig)

    @field_validator("objective_history")
    @classmethod
    def check_history(cls, values: List[float]) -> List[float]:
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"objective values must be finite and non-negative, got {v}")
        return values

    @property
    def initial_objective(self) -> float:
        return self.objective_history[0]

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1]
