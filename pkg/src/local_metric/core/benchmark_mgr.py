"""
Copyright 2025 local-metric contributors

Benchmark protocol: R seeded train / test splits, preprocessing fitted on each split,
training, then test accuracy of the learned model and of the identity metric baseline.
"""
import time
from typing import Callable, Optional
from local_metric.core.classifier_mgr import evaluate
from local_metric.core.dataset_mgr import preprocess, split
from local_metric.core.models.dataset_model import LabeledDataset
from local_metric.core.models.metric_model import ModelParams
from local_metric.core.models.training_model import TrainConfig
from local_metric.core.trainer_mgr import train
from local_metric.core.utils.app_config import logger
from local_metric.core.utils.errors import ConfigurationError
from local_metric.core.utils.report_mgr import BenchmarkReport, BenchmarkRun, build_benchmark_report


def identity_model(dim: int) -> ModelParams:
    """Baseline: no region, background metric I, i.e. plain Euclidean K-min classification."""
    return ModelParams.identity(dim)


def run_single(dataset: LabeledDataset, config: TrainConfig, seed: int, train_fraction: float, statistics: str) -> BenchmarkRun:
    train_split, test_split = split(dataset, train_fraction, seed)
    train_split, test_split = preprocess(train_split, test_split, statistics)
    report = train(train_split, config.model_copy(update={"seed": seed}))
    learned = evaluate(test_split, train_split, report.final_model, config.k_neighbors)
    baseline = evaluate(test_split, train_split, identity_model(dataset.dim), config.k_neighbors)
    logger.info(f"{dataset.name} seed {seed}: learned {learned:.4f}, baseline {baseline:.4f}")
    return BenchmarkRun(seed=seed,
                        learned_accuracy=learned,
                        baseline_accuracy=baseline,
                        initial_objective=report.initial_objective,
                        final_objective=report.final_objective,
                        epochs_run=report.epochs_run,
                        num_regions=report.final_model.num_regions,
                        train_size=train_split.size,
                        test_size=test_split.size)


def run_benchmark(dataset: LabeledDataset,
                  config: TrainConfig,
                  repeats: int = 10,
                  train_fraction: float = 0.6,
                  statistics: str = "train",
                  on_run: Optional[Callable[[BenchmarkRun], None]] = None) -> BenchmarkReport:
    """
    Runs seeds config.seed .. config.seed + repeats - 1. Each seed drives both the split and the
    k-means initialization.
    """
    if repeats < 1:
        raise ConfigurationError(f"repeats must be positive, got {repeats}")
    logger.info(f"Benchmark on {dataset.name}: {repeats} repeats, train fraction {train_fraction}, statistics {statistics}")
    start_time = time.perf_counter()
    runs = []
    for seed in range(config.seed, config.seed + repeats):
        run = run_single(dataset, config, seed, train_fraction, statistics)
        runs.append(run)
        if on_run:
            on_run(run)
    return build_benchmark_report(dataset.name, runs, config, train_fraction, statistics, time.perf_counter() - start_time)
