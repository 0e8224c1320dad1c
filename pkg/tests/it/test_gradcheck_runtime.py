"""
Copyright 2025 local-metric contributors

Full default gradient check: dimensions 2, 8 and 30, 50 configurations per group, in less
than two minutes.
"""
import unittest
import os
import pathlib
import time
os.environ["CONFIG_FILE"] = str(pathlib.Path(__file__).parent.parent / "config.yaml")
os.environ.setdefault("LOCAL_METRIC_HOME", str(pathlib.Path(__file__).parent.parent / "tmp"))

from local_metric.core.gradcheck_mgr import run_gradient_check


class TestGradcheckRuntime(unittest.TestCase):

    def test_default_run_fits_in_two_minutes(self):
        start_time = time.perf_counter()
        report = run_gradient_check()
        elapsed = time.perf_counter() - start_time
        for result in report.results:
            print(f"{result.group} d={result.dim}: {result.configurations} configurations, {result.max_relative_error:.3e}")
        print(f"elapsed {elapsed:.1f}s")
        assert [(r.group, r.dim) for r in report.results] == [(g, d) for g in ("gamma", "distance", "objective") for d in (2, 8, 30)]
        assert all(r.configurations == 50 for r in report.results)
        assert report.passed
        assert elapsed < 120


if __name__ == '__main__':
    unittest.main()
