"""
Copyright 2025 local-metric contributors
"""
import unittest
import os
import pathlib
import json
os.environ["CONFIG_FILE"] = str(pathlib.Path(__file__).parent.parent.parent / "config.yaml")
os.environ.setdefault("LOCAL_METRIC_HOME", str(pathlib.Path(__file__).parent.parent.parent / "tmp"))

import yaml
from pydantic import ValidationError
from local_metric.core.models.training_model import TrainConfig
from local_metric.core.utils.report_mgr import (
    BenchmarkReport,
    BenchmarkRun,
    GradCheckReport,
    GradCheckResult,
    build_benchmark_report,
    build_benchmark_summary,
    build_gradcheck_summary,
    mean_and_std,
    pad_or_truncate,
    render_report,
)


class TestReportMgr(unittest.TestCase):

    def setUp(self):
        self.runs = [BenchmarkRun(seed=0, learned_accuracy=0.8, baseline_accuracy=0.7, initial_objective=1.2,
                                  final_objective=0.9, epochs_run=40, num_regions=4, train_size=60, test_size=40),
                     BenchmarkRun(seed=1, learned_accuracy=0.9, baseline_accuracy=0.7, initial_objective=1.1,
                                  final_objective=0.8, epochs_run=35, num_regions=3, train_size=60, test_size=40)]

    def test_pad_or_truncate(self):
        assert pad_or_truncate("abc", 5) == "abc  "
        assert pad_or_truncate("abcdef", 3) == "abc"
        assert pad_or_truncate(12, 4) == "12  "

    def test_mean_and_std(self):
        mean, std = mean_and_std([0.8, 0.9])
        self.assertAlmostEqual(mean, 0.85, places=12)
        self.assertAlmostEqual(std, 0.05, places=12)
        assert mean_and_std([0.75]) == (0.75, 0.0)

    def test_build_benchmark_report(self):
        report = build_benchmark_report("fourclass", self.runs, TrainConfig(), 0.6, "train", 1.5)
        assert report.repeats == 2
        assert report.learned_accuracies == [0.8, 0.9]
        assert report.baseline_std == 0
        summary = build_benchmark_summary(report)
        print(summary)
        assert "fourclass: learned 85.00 ± 5.00" in summary
        assert "identity baseline 70.00 ± 0.00" in summary

    def test_inconsistent_aggregates_are_rejected(self):
        with self.assertRaises(ValidationError):
            BenchmarkReport(dataset="x", repeats=2, train_fraction=0.6, statistics="train", runs=self.runs,
                            learned_accuracies=[0.8, 0.9], baseline_accuracies=[0.7, 0.7],
                            learned_mean=0.9, learned_std=0.05, baseline_mean=0.7, baseline_std=0.0)
        with self.assertRaises(ValidationError):
            BenchmarkReport(dataset="x", repeats=2, train_fraction=0.6, statistics="train", runs=self.runs,
                            learned_accuracies=[0.8], baseline_accuracies=[0.7, 0.7])

    def test_render_report(self):
        report = build_benchmark_report("fourclass", self.runs, TrainConfig(), 0.6, "train", 1.5)
        as_json = json.loads(render_report(report))
        assert as_json["learned_accuracies"] == [0.8, 0.9]
        assert as_json["config"]["alpha"] == 0.1
        as_yaml = yaml.safe_load(render_report(report, as_yaml=True))
        assert as_yaml["dataset"] == "fourclass"
        assert len(as_yaml["runs"]) == 2

    def test_gradcheck_summary(self):
        report = GradCheckReport(seed=0, results=[
            GradCheckResult(group="gamma", dim=2, configurations=50, max_relative_error=1e-8, threshold=1e-4, passed=True),
            GradCheckResult(group="objective", dim=30, configurations=50, max_relative_error=2e-3, threshold=1e-4, passed=False)])
        summary = build_gradcheck_summary(report)
        print(summary)
        assert not report.passed
        assert "PASS" in summary
        assert "FAIL" in summary


if __name__ == '__main__':
    unittest.main()
