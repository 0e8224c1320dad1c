"""
Copyright 2025 local-metric contributors

Model file: a versioned JSON document holding everything `eval` needs to score new data.
Metrics are stored row-major, floats with full round-trip precision, no timestamps, so the
same training run always writes the same bytes.
"""
import json
from typing import List
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from local_metric.core.models.dataset_model import LabeledDataset, PreprocessingStats
from local_metric.core.models.metric_model import Ball, InfluentialRegion, ModelParams
from local_metric.core.models.training_model import TrainConfig
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError, DataFormatError

MODEL_FORMAT_VERSION = 1


class RegionRecord(BaseModel):
    center: List[float]
    radius: float
    metric: List[float] = Field(description="d*d entries, row-major")


class ModelFile(BaseModel):
    format_version: int = MODEL_FORMAT_VERSION
    dim: int
    num_regions: int
    k_neighbors: int
    background_metric: List[float] = Field(description="d*d entries, row-major")
    regions: List[RegionRecord] = Field(default_factory=list)
    preprocessing: PreprocessingStats
    train_instances: List[List[float]] = Field(default_factory=list, description="preprocessed training set used by the K-min classifier")
    train_labels: List[int] = Field(default_factory=list)
    config: TrainConfig = Field(default_factory=TrainConfig)


class StoredModel(BaseModel):
    """Model file content turned back into library types."""
    model_config = ConfigDict(arbitrary_types_allowed=True)
    model: ModelParams
    trainset: LabeledDataset
    preprocessing: PreprocessingStats
    k_neighbors: int
    config: TrainConfig


# ----------- Public APIs  ------------------------------------------------------------

def to_model_file(model: ModelParams, trainset: LabeledDataset, preprocessing: PreprocessingStats, config: TrainConfig) -> ModelFile:
    return ModelFile(dim=model.dim,
                     num_regions=model.num_regions,
                     k_neighbors=config.k_neighbors,
                     background_metric=model.background_metric.ravel().tolist(),
                     regions=[RegionRecord(center=r.ball.center.tolist(), radius=r.ball.radius, metric=r.metric.ravel().tolist())
                              for r in model.regions],
                     preprocessing=preprocessing,
                     train_instances=trainset.instances.tolist(),
                     train_labels=trainset.labels.tolist(),
                     config=config)


def save_model(path: str, model: ModelParams, trainset: LabeledDataset, preprocessing: PreprocessingStats, config: TrainConfig) -> str:
    content = to_model_file(model, trainset, preprocessing, config)
    with open(path, "w") as f:
        f.write(content.model_dump_json(indent=2))
    logger.info(f"Model with {model.num_regions} regions, d={model.dim} saved to {path}")
    return path


def load_model(path: str) -> StoredModel:
    try:
        with open(path) as f:
            content = ModelFile.model_validate(json.load(f))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        logger.error(f"Cannot load model file {path}: {e}")
        raise DataFormatError(f"cannot load model file {path}: {e}") from e
    if content.format_version != MODEL_FORMAT_VERSION:
        raise DataFormatError(f"model file {path} has format version {content.format_version}, expected {MODEL_FORMAT_VERSION}")
    return from_model_file(content)


def from_model_file(content: ModelFile) -> StoredModel:
    d = content.dim
    if len(content.regions) != content.num_regions:
        raise DataFormatError(f"model file declares {content.num_regions} regions but holds {len(content.regions)}")
    try:
        model = ModelParams(background_metric=_square(content.background_metric, d),
                            regions=[InfluentialRegion(ball=Ball(center=r.center, radius=r.radius), metric=_square(r.metric, d))
                                     for r in content.regions])
        trainset = LabeledDataset(instances=np.asarray(content.train_instances, dtype=float).reshape(-1, d),
                                  labels=content.train_labels,
                                  name="model-trainset")
    except (ValidationError, ValueError) as e:
        raise DataFormatError(f"inconsistent model file: {e}") from e
    if content.k_neighbors < 1:
        raise ConfigurationError(f"model file has K={content.k_neighbors}")
    return StoredModel(model=model,
                       trainset=trainset,
                       preprocessing=content.preprocessing,
                       k_neighbors=content.k_neighbors,
                       config=content.config)


# ----------- Private APIs  ------------------------------------------------------------

def _square(entries: List[float], d: int) -> np.ndarray:
    if len(entries) != d * d:
        raise ValueError(f"expected {d * d} metric entries, got {len(entries)}")
    return np.asarray(entries, dtype=float).reshape(d, d)
