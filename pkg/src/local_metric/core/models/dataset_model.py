"""
Copyright 2025 local-metric contributors
"""
from typing import Annotated, List
import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator


def _as_instances(value) -> np.ndarray:
    x = np.asarray(value, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"instances must be a 2-d array, got shape {x.shape}")
    return x

def _as_labels(value) -> np.ndarray:
    return np.asarray(value, dtype=int).ravel()

Instances = Annotated[np.ndarray, BeforeValidator(_as_instances)]
Labels = Annotated[np.ndarray, BeforeValidator(_as_labels)]


class LabeledDataset(BaseModel):
    """Binary dataset with labels in {-1, +1}."""
    model_config = ConfigDict(arbitrary_types_allowed=True)
    instances: Instances
    labels: Labels
    name: str = Field(default="dataset")

    @model_validator(mode="after")
    def check_content(self) -> "LabeledDataset":
        if self.instances.shape[0] < 1:
            raise ValueError("a dataset needs at least one instance")
        if self.instances.shape[0] != self.labels.shape[0]:
            raise ValueError(f"{self.instances.shape[0]} instances but {self.labels.shape[0]} labels")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if not np.all(np.isfinite(self.instances)):
            raise ValueError("instances must be finite")
        return self

    @property
    def size(self) -> int:
        return self.instances.shape[0]

    @property
    def dim(self) -> int:
        return self.instances.shape[1]

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(instances=self.instances[indices], labels=self.labels[indices], name=self.name)


class RawDataset(LabeledDataset):
    """Dataset as parsed from a file: dense features, labels mapped to {-1, +1} by ascending source label."""
    source_labels: List[float] = Field(default_factory=list, description="distinct source labels mapped to -1 then +1")
    declared_dim: int = 0

    def as_labeled(self) -> LabeledDataset:
        return LabeledDataset(instances=self.instances, labels=self.labels, name=self.name)


class PreprocessingStats(BaseModel):
    """Per-feature statistics applied before the L2 normalization."""
    mean: List[float]
    scale: List[float]
    statistics: str = Field(default="train", description="train: split statistics, global: whole dataset")
