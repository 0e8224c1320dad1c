"""
Copyright 2025 local-metric contributors
"""
import unittest
import os
import pathlib
os.environ["CONFIG_FILE"] = str(pathlib.Path(__file__).parent.parent.parent / "config.yaml")
os.environ.setdefault("LOCAL_METRIC_HOME", str(pathlib.Path(__file__).parent.parent.parent / "tmp"))

import numpy as np
from local_metric.core.models.metric_model import Ball, IntersectionResult, Segment
from local_metric.core.utils.errors import ConfigurationError
import local_metric.core.geometry_mgr as geometry_mgr
from local_metric.core.geometry_mgr import (
    batch_gamma_gradients,
    batch_intersection,
    clamp_to_segment,
    gamma_gradients,
    intersection,
    kink_margin,
    line_ball_coefficients,
    table_case,
)


def _random_pair(rng: np.random.Generator, dim: int):
    """Segment with endpoints ~ N(0, I) and a ball placed around its line."""
    start, end = rng.normal(size=dim), rng.normal(size=dim)
    direction = end - start
    length = np.linalg.norm(direction)
    center = start + rng.uniform(-1.5, 2.5) * direction + rng.normal(scale=0.3 * length / np.sqrt(dim), size=dim)
    radius = length * rng.uniform(0.05, 1.2)
    return Segment(start=start, end=end), Ball(center=center, radius=radius)


def _on_x_axis(s: float, e: float) -> IntersectionResult:
    return intersection(Segment(start=[s, 0.0], end=[e, 0.0]), Ball(center=[0.0, 0.0], radius=1.0))


class TestGeometryMgr(unittest.TestCase):

    def test_chord_through_center(self):
        result = line_ball_coefficients(Segment(start=[-2.0, 0.0], end=[2.0, 0.0]), Ball(center=[0.0, 0.0], radius=1.0))
        assert result.a == 16
        assert result.b == -16
        assert result.c == 3
        assert result.delta == 64
        assert result.intersects
        self.assertAlmostEqual(result.lambda_u, 0.25, places=15)
        self.assertAlmostEqual(result.lambda_v, 0.75, places=15)
        clamped = clamp_to_segment(result)
        self.assertAlmostEqual(clamped.gamma, 0.5, places=15)
        assert table_case(clamped) == geometry_mgr.CASE_INSIDE_SEGMENT

    def test_ball_away_from_line(self):
        result = intersection(Segment(start=[0.0, 0.0], end=[1.0, 0.0]), Ball(center=[0.0, 10.0], radius=1.0))
        assert result.delta < 0
        assert not result.intersects
        assert result.lambda_u is None
        assert result.gamma == 0
        assert table_case(result) == geometry_mgr.CASE_NO_INTERSECTION

    def test_tangent_line(self):
        result = intersection(Segment(start=[-1.0, 1.0], end=[1.0, 1.0]), Ball(center=[0.0, 0.0], radius=1.0))
        assert result.delta == 0
        assert not result.intersects
        assert result.gamma == 0
        assert table_case(result) == geometry_mgr.CASE_TANGENT
        d_center, d_radius = gamma_gradients(Segment(start=[-1.0, 1.0], end=[1.0, 1.0]), Ball(center=[0.0, 0.0], radius=1.0))
        assert np.all(d_center == 0)
        assert d_radius == 0

    def test_degenerate_segment(self):
        segment = Segment(start=[0.5, 0.5], end=[0.5, 0.5])
        ball = Ball(center=[0.0, 0.0], radius=2.0)
        result = intersection(segment, ball)
        assert result.a == 0
        assert result.gamma == 0
        assert table_case(result) == geometry_mgr.CASE_DEGENERATE
        d_center, d_radius = gamma_gradients(segment, ball)
        assert np.all(d_center == 0)
        assert d_radius == 0

    def test_every_case_on_the_x_axis(self):
        expected = [((2.0, 3.0), geometry_mgr.CASE_BEFORE_START, 0.0),
                    ((0.0, 2.0), geometry_mgr.CASE_COVERS_START, 0.5),
                    ((-0.5, 0.5), geometry_mgr.CASE_COVERS_SEGMENT, 1.0),
                    ((-2.0, 2.0), geometry_mgr.CASE_INSIDE_SEGMENT, 0.5),
                    ((-2.0, 0.0), geometry_mgr.CASE_COVERS_END, 0.5),
                    ((-3.0, -2.0), geometry_mgr.CASE_AFTER_END, 0.0)]
        for (s, e), case, gamma in expected:
            result = _on_x_axis(s, e)
            print(f"{s} -> {e}: {table_case(result)} gamma={result.gamma}")
            assert table_case(result) == case
            self.assertAlmostEqual(result.gamma, gamma, places=12)
            assert 0 <= result.lambda_p <= result.lambda_q <= 1

    def test_swapping_the_endpoints(self):
        # lambda_p, lambda_q map to 1 - lambda_q, 1 - lambda_p on every segment crossing the ball
        for s, e in [(-2.0, 2.0), (-0.5, 0.5), (0.0, 2.0), (-2.0, 0.0), (0.5, 3.0), (-3.0, 0.2), (2.0, 3.0)]:
            forward, backward = _on_x_axis(s, e), _on_x_axis(e, s)
            assert table_case(forward) != geometry_mgr.CASE_NO_INTERSECTION
            self.assertAlmostEqual(backward.lambda_p, 1 - forward.lambda_q, places=12)
            self.assertAlmostEqual(backward.lambda_q, 1 - forward.lambda_p, places=12)
            self.assertAlmostEqual(backward.gamma, forward.gamma, places=12)
        rng = np.random.default_rng(11)
        seen = set()
        for _ in range(2000):
            segment, ball = _random_pair(rng, 3)
            forward = intersection(segment, ball)
            backward = intersection(Segment(start=segment.end, end=segment.start), ball)
            assert abs(backward.gamma - forward.gamma) <= 1e-12
            if not forward.intersects:
                # misses keep lambda_p = lambda_q = 0 in both directions
                assert (backward.lambda_p, backward.lambda_q) == (0.0, 0.0)
                continue
            seen.add(table_case(forward))
            assert abs(backward.lambda_p - (1 - forward.lambda_q)) <= 1e-10
            assert abs(backward.lambda_q - (1 - forward.lambda_p)) <= 1e-10
        for case in (geometry_mgr.CASE_INSIDE_SEGMENT, geometry_mgr.CASE_COVERS_SEGMENT,
                     geometry_mgr.CASE_COVERS_START, geometry_mgr.CASE_COVERS_END):
            assert case in seen

    def test_dimension_mismatch(self):
        with self.assertRaises(ConfigurationError):
            line_ball_coefficients(Segment(start=[0.0, 0.0], end=[1.0, 0.0]), Ball(center=[0.0, 0.0, 0.0], radius=1.0))

    def test_roots_satisfy_the_sphere_equation(self):
        rng = np.random.default_rng(11)
        checked = 0
        for k in range(500):
            segment, ball = _random_pair(rng, (2, 5, 20)[k % 3])
            result = line_ball_coefficients(segment, ball)
            if not result.intersects:
                continue
            for lam in (result.lambda_u, result.lambda_v):
                point = segment.start + lam * (segment.end - segment.start)
                residual = np.sum((point - ball.center) ** 2) - ball.radius ** 2
                assert abs(residual) <= 1e-9 * ball.radius ** 2
            assert result.lambda_u <= result.lambda_v
            checked += 1
        assert checked > 100

    def test_gamma_matches_sampling_oracle(self):
        # midpoints of N equal cells, the count is off by at most one point per boundary
        rng = np.random.default_rng(5)
        samples = 20000
        t = (np.arange(samples) + 0.5) / samples
        for k in range(300):
            segment, ball = _random_pair(rng, (2, 5, 20)[k % 3])
            points = segment.start[None, :] + t[:, None] * (segment.end - segment.start)[None, :]
            inside = np.mean(np.sum((points - ball.center) ** 2, axis=1) <= ball.radius ** 2)
            gamma = intersection(segment, ball).gamma
            assert abs(gamma - inside) <= 2e-4, f"gamma {gamma} vs sampled {inside}"

    def test_random_pairs_cover_all_generic_cases(self):
        rng = np.random.default_rng(7)
        counts = {case: 0 for case in geometry_mgr.TABLE_CASES}
        for k in range(1000):
            segment, ball = _random_pair(rng, (2, 5, 20)[k % 3])
            counts[table_case(intersection(segment, ball))] += 1
        print(counts)
        for case, count in counts.items():
            if case != geometry_mgr.CASE_TANGENT:
                assert count >= 20, f"case {case} seen {count} times"

    def test_clamp_is_idempotent(self):
        rng = np.random.default_rng(3)
        for k in range(200):
            segment, ball = _random_pair(rng, 3)
            once = clamp_to_segment(line_ball_coefficients(segment, ball))
            twice = clamp_to_segment(once)
            assert once == twice
            assert 0 <= once.lambda_p <= once.lambda_q <= 1
            assert 0 <= once.gamma <= 1

    def test_clamp_of_hand_built_result(self):
        result = IntersectionResult(a=1.0, b=0.0, c=-1.0, delta=4.0, intersects=True, lambda_u=-0.5, lambda_v=1.7)
        clamped = clamp_to_segment(result)
        assert clamped.lambda_p == 0
        assert clamped.lambda_q == 1
        assert clamped.gamma == 1

    def test_disjoint_ball_has_zero_gradient(self):
        d_center, d_radius = gamma_gradients(Segment(start=[0.0, 0.0], end=[1.0, 0.0]), Ball(center=[0.0, 10.0], radius=1.0))
        assert np.all(d_center == 0)
        assert d_radius == 0

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(17)
        eps = 1e-6
        seen = set()
        checked = 0
        while checked < 150:
            segment, ball = _random_pair(rng, (2, 5, 20)[checked % 3])
            result = intersection(segment, ball)
            if not result.intersects or kink_margin(result) < 1e-3:
                continue
            d_center, d_radius = gamma_gradients(segment, ball)
            analytic = np.concatenate([d_center, [d_radius]])
            theta = np.concatenate([ball.center, [ball.radius]])
            numeric = np.zeros_like(theta)
            for j in range(theta.shape[0]):
                step = np.zeros_like(theta)
                step[j] = eps
                plus = intersection(segment, Ball(center=(theta + step)[:-1], radius=(theta + step)[-1])).gamma
                minus = intersection(segment, Ball(center=(theta - step)[:-1], radius=(theta - step)[-1])).gamma
                numeric[j] = (plus - minus) / (2 * eps)
            scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-8)
            assert np.linalg.norm(analytic - numeric) / scale < 1e-5, f"{table_case(result)}: {analytic} vs {numeric}"
            seen.add(table_case(result))
            checked += 1
        assert geometry_mgr.CASE_INSIDE_SEGMENT in seen
        assert geometry_mgr.CASE_COVERS_START in seen
        assert geometry_mgr.CASE_COVERS_END in seen

    def test_batch_agrees_with_scalar(self):
        rng = np.random.default_rng(23)
        pairs = [_random_pair(rng, 4) for _ in range(50)]
        ball = pairs[0][1]
        starts = np.stack([p[0].start for p in pairs])
        ends = np.stack([p[0].end for p in pairs])
        batch = batch_intersection(starts, ends, ball.center, ball.radius)
        d_centers, d_radii = batch_gamma_gradients(starts, ends, ball.center, ball.radius)
        for k, (segment, _) in enumerate(pairs):
            scalar = intersection(segment, ball)
            self.assertAlmostEqual(scalar.gamma, batch.gamma[k], places=12)
            d_center, d_radius = gamma_gradients(segment, ball)
            np.testing.assert_allclose(d_center, d_centers[k], rtol=1e-12, atol=1e-12)
            self.assertAlmostEqual(d_radius, d_radii[k], places=10)

    def test_kink_margin(self):
        assert kink_margin(_on_x_axis(-2.0, 2.0)) == 0.25
        assert kink_margin(intersection(Segment(start=[0.0, 0.0], end=[0.0, 0.0]), Ball(center=[0.0, 0.0], radius=1.0))) == float("inf")
        assert kink_margin(_on_x_axis(-1.0, 1.0)) < 1e-12


if __name__ == '__main__':
    unittest.main()
