"""
Copyright 2025 local-metric contributors

Reports produced by the bench and gradcheck commands, with their text summaries and JSON / YAML renderings.
"""
import math
from typing import List
import numpy as np
from pydantic import BaseModel, Field, model_validator
from pydantic_yaml import to_yaml_str
from local_metric.core.models.training_model import TrainConfig

RECOMPUTE_TOLERANCE = 1e-12


class BenchmarkRun(BaseModel):
    seed: int
    learned_accuracy: float = Field(ge=0, le=1)
    baseline_accuracy: float = Field(ge=0, le=1)
    initial_objective: float
    final_objective: float
    epochs_run: int = 0
    num_regions: int = Field(default=0, description="regions left after initialization")
    train_size: int = 0
    test_size: int = 0


class BenchmarkReport(BaseModel):
    """Report of one benchmark: R seeded splits, learned model against the identity baseline."""
    dataset: str
    repeats: int
    train_fraction: float
    statistics: str
    runs: List[BenchmarkRun] = Field(default_factory=list)
    learned_accuracies: List[float] = Field(default_factory=list)
    baseline_accuracies: List[float] = Field(default_factory=list)
    learned_mean: float = 0
    learned_std: float = 0
    baseline_mean: float = 0
    baseline_std: float = 0
    config: TrainConfig = Field(default_factory=TrainConfig)
    wall_clock_seconds: float = 0

    @model_validator(mode="after")
    def check_aggregates(self) -> "BenchmarkReport":
        if len(self.learned_accuracies) != len(self.runs) or len(self.baseline_accuracies) != len(self.runs):
            raise ValueError("per-seed accuracies do not match the runs")
        for values, mean, std, what in ((self.learned_accuracies, self.learned_mean, self.learned_std, "learned"),
                                        (self.baseline_accuracies, self.baseline_mean, self.baseline_std, "baseline")):
            if not values:
                continue
            expected_mean, expected_std = mean_and_std(values)
            if abs(expected_mean - mean) > RECOMPUTE_TOLERANCE or abs(expected_std - std) > RECOMPUTE_TOLERANCE:
                raise ValueError(f"{what} mean/std {mean}/{std} do not match the per-seed values ({expected_mean}/{expected_std})")
        return self


class GradCheckResult(BaseModel):
    group: str = Field(description="gamma, distance or objective")
    dim: int
    configurations: int
    max_relative_error: float
    threshold: float
    passed: bool


class GradCheckReport(BaseModel):
    seed: int
    results: List[GradCheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def pad_or_truncate(text: str, length: int, padding_char: str = ' ') -> str:
    """
    Pad or truncate text to a specific length.

    Args:
        text: Text to pad/truncate
        length: Target length
        padding_char: Character to use for padding

    Returns:
        Padded or truncated text
    """
    text = text if isinstance(text, str) else str(text)
    if len(text) > length:
        return text[:length]
    return text.ljust(length, padding_char)


def mean_and_std(values: List[float]) -> tuple[float, float]:
    """Mean and population standard deviation; a single value has std 0."""
    array = np.asarray(values, dtype=float)
    return float(np.mean(array)), float(np.std(array))


def build_benchmark_report(dataset: str,
                           runs: List[BenchmarkRun],
                           config: TrainConfig,
                           train_fraction: float,
                           statistics: str,
                           wall_clock_seconds: float) -> BenchmarkReport:
    learned = [r.learned_accuracy for r in runs]
    baseline = [r.baseline_accuracy for r in runs]
    learned_mean, learned_std = mean_and_std(learned) if runs else (math.nan, math.nan)
    baseline_mean, baseline_std = mean_and_std(baseline) if runs else (math.nan, math.nan)
    return BenchmarkReport(dataset=dataset,
                           repeats=len(runs),
                           train_fraction=train_fraction,
                           statistics=statistics,
                           runs=runs,
                           learned_accuracies=learned,
                           baseline_accuracies=baseline,
                           learned_mean=learned_mean,
                           learned_std=learned_std,
                           baseline_mean=baseline_mean,
                           baseline_std=baseline_std,
                           config=config,
                           wall_clock_seconds=wall_clock_seconds)


def build_benchmark_summary(report: BenchmarkReport) -> str:
    summary = f"{pad_or_truncate('Seed', 6)} {pad_or_truncate('Learned', 10)} {pad_or_truncate('Baseline', 10)} {pad_or_truncate('Objective', 24)} {pad_or_truncate('Epochs', 8)} {'Regions':<8}\n"
    summary += "-" * 70 + "\n"
    for run in report.runs:
        objective = f"{run.initial_objective:.4f} -> {run.final_objective:.4f}"
        summary += f"{pad_or_truncate(run.seed, 6)} {pad_or_truncate(f'{run.learned_accuracy:.4f}', 10)} {pad_or_truncate(f'{run.baseline_accuracy:.4f}', 10)} {pad_or_truncate(objective, 24)} {pad_or_truncate(run.epochs_run, 8)} {run.num_regions:<8}\n"
    summary += "-" * 70 + "\n"
    summary += f"{report.dataset}: learned {100 * report.learned_mean:.2f} ± {100 * report.learned_std:.2f}, "
    summary += f"identity baseline {100 * report.baseline_mean:.2f} ± {100 * report.baseline_std:.2f} "
    summary += f"over {report.repeats} splits ({report.wall_clock_seconds:.1f}s)\n"
    return summary


def build_gradcheck_summary(report: GradCheckReport) -> str:
    summary = f"{pad_or_truncate('Group', 10)} {pad_or_truncate('Dim', 5)} {pad_or_truncate('Configs', 8)} {pad_or_truncate('Max rel. error', 16)} Result\n"
    summary += "-" * 50 + "\n"
    for r in report.results:
        summary += f"{pad_or_truncate(r.group, 10)} {pad_or_truncate(r.dim, 5)} {pad_or_truncate(r.configurations, 8)} {pad_or_truncate(f'{r.max_relative_error:.3e}', 16)} {'PASS' if r.passed else 'FAIL'}\n"
    return summary


def render_report(report: BaseModel, as_yaml: bool = False) -> str:
    if as_yaml:
        return to_yaml_str(report)
    return report.model_dump_json(indent=2)

