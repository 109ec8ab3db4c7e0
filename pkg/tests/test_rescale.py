import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausspoly.errors import (
    BelowThresholdError,
    ContextError,
    DomainError,
    InvalidParameterError,
)
from gausspoly.hull import convex_hull
from gausspoly.rescale import (
    RescaledPoint,
    critical_radius,
    extreme_points,
    intensity_density,
    minimal_admissible_lambda,
    paraboloid_contains,
    radius_identity_sides,
    scale_point,
    unscale_point,
)
from gausspoly.sampler import GaussianSample, sample_poisson_gaussian, substream


def test_critical_radius_reference_value():
    # 2 log lam - log(8 pi^2 log lam) at lam = e^10
    expected = math.sqrt(20.0 - math.log(8.0 * math.pi ** 2 * 10.0))
    r = critical_radius(math.e ** 10, 2)
    assert abs(r - expected) <= 1e-14
    assert abs(r - 3.65082) <= 1e-5


def test_critical_radius_monotone_in_lambda():
    for d in (2, 3, 4):
        lams = np.exp(np.linspace(math.log(minimal_admissible_lambda(d)) +
                                  0.01, 20.0, 50))
        radii = [critical_radius(l, d) for l in lams]
        assert all(b > a for a, b in zip(radii, radii[1:]))


def test_below_threshold_errors_name_minimal_lambda():
    with pytest.raises(BelowThresholdError):
        critical_radius(1.0, 2)
    with pytest.raises(BelowThresholdError) as exc:
        critical_radius(10.0, 2)
    assert abs(exc.value.minimal_lambda - minimal_admissible_lambda(2)) == 0
    assert "minimal admissible" in str(exc.value)
    with pytest.raises(InvalidParameterError):
        critical_radius(100.0, 0)


def test_minimal_admissible_lambda_is_the_threshold():
    for d in (2, 3, 4, 5):
        m = minimal_admissible_lambda(d)
        assert abs(critical_radius(m * (1 + 1e-9), d) - 1.0) <= 1e-4
        with pytest.raises(BelowThresholdError):
            critical_radius(m * (1 - 1e-6), d)


def test_scale_point_special_cases():
    lam, d = 1e4, 3
    r = critical_radius(lam, d)
    u0 = np.array([0.0, 0.0, 1.0])
    w = scale_point(r * u0, lam)
    assert np.allclose(w.v, 0.0) and abs(w.h) <= 1e-12
    w0 = scale_point(np.zeros(d), lam)
    assert np.allclose(w0.v, 0.0) and w0.h == r * r
    anti = scale_point(-2.0 * u0, lam)
    assert abs(np.linalg.norm(anti.v) - math.pi * r) <= 1e-12


def test_unscale_special_cases():
    lam, d = 1e4, 3
    r = critical_radius(lam, d)
    x = unscale_point(RescaledPoint(np.zeros(d - 1), 0.0, lam, r))
    assert np.allclose(x, r * np.array([0.0, 0.0, 1.0]))
    assert np.allclose(
        unscale_point(RescaledPoint(np.zeros(d - 1), r * r, lam, r)), 0.0)


def test_round_trip_random_points():
    rng = substream((30,))
    for _ in range(500):
        d = int(rng.integers(2, 5))
        lam = math.exp(rng.uniform(
            math.log(minimal_admissible_lambda(d)) + 0.1, 15.0))
        x = rng.standard_normal(d) * rng.uniform(0.05, 3.0)
        back = unscale_point(scale_point(x, lam))
        assert np.linalg.norm(back - x) <= 1e-9 * max(np.linalg.norm(x), 1.0)


def test_scaled_points_lie_in_window():
    rng = substream((31,))
    lam = 1e5
    for _ in range(200):
        d = int(rng.integers(2, 5))
        w = scale_point(rng.standard_normal(d) * 5.0, lam)
        assert w.in_window()


def test_unscale_rejects_outside_window():
    lam, d = 1e4, 2
    r = critical_radius(lam, d)
    with pytest.raises(DomainError):
        unscale_point(RescaledPoint(np.array([4.0 * r]), 0.0, lam, r))
    with pytest.raises(DomainError):
        unscale_point(RescaledPoint(np.zeros(1), r * r + 1.0, lam, r))


def test_limit_density():
    w = RescaledPoint(np.array([0.3]), 0.0, 1e4, critical_radius(1e4, 2))
    assert intensity_density(w, 1e4, "limit") == 1.0
    w2 = RescaledPoint(np.array([0.3]), -2.0, 1e4, critical_radius(1e4, 2))
    assert abs(intensity_density(w2, 1e4, "limit") - math.exp(-2.0)) <= 1e-15


def test_sinc_factor_continuous_at_zero():
    lam, d = 1e4, 4
    r = critical_radius(lam, d)
    w = RescaledPoint(np.zeros(d - 1), 0.0, lam, r)
    assert abs(intensity_density(w, lam, "lebesgue-image") - 1.0) <= 1e-15
    with pytest.raises(InvalidParameterError):
        intensity_density(w, lam, "bogus")


def test_rescaled_density_zero_outside_window():
    lam, d = 1e4, 2
    r = critical_radius(lam, d)
    w = RescaledPoint(np.array([4.0 * r]), 0.0, lam, r)
    assert intensity_density(w, lam, "rescaled") == 0.0
    assert intensity_density(w, lam, "lebesgue-image") == 0.0


def test_radius_identity_on_random_grid():
    rng = substream((32,))
    for _ in range(200):
        d = int(rng.integers(2, 6))
        lam = math.exp(rng.uniform(
            math.log(minimal_admissible_lambda(d)) + 0.1, 20.0))
        r = critical_radius(lam, d)
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        h = rng.uniform(-5.0, r * r)
        left, right = radius_identity_sides(u, h, lam, d)
        assert abs(left - right) <= 1e-12 * max(abs(left), abs(right))


def test_rescaled_density_converges_to_limit():
    d = 3
    v = np.array([0.2, -0.1])
    h = -1.0
    gaps = []
    for lam in (1e3, 1e5, 1e7, 1e9, 1e11):
        r = critical_radius(lam, d)
        w = RescaledPoint(v, h, lam, r)
        ratio = intensity_density(w, lam, "rescaled") / math.exp(h)
        gaps.append(abs(ratio - 1.0))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_paraboloid_apex_and_vertical_cases():
    lam, d = 1e4, 2
    r = critical_radius(lam, d)
    apex = RescaledPoint(np.array([0.5]), 1.0, lam, r)
    assert paraboloid_contains(apex, apex)
    above = RescaledPoint(np.array([0.5]), 2.0, lam, r)
    assert paraboloid_contains(apex, above)
    below = RescaledPoint(np.array([0.5]), 0.5, lam, r)
    assert not paraboloid_contains(apex, below)


def test_paraboloid_rejects_mismatched_contexts():
    a = RescaledPoint(np.array([0.0]), 0.0, 1e4, critical_radius(1e4, 2))
    b = RescaledPoint(np.array([0.0]), 0.0, 1e5, critical_radius(1e5, 2))
    with pytest.raises(ContextError):
        paraboloid_contains(a, b)


def test_paraboloid_matches_ball_membership():
    # the grain with apex T(x) is the image of the ball B(x/2, |x|/2)
    rng = substream((33,))
    lam, d = 1e4, 2
    agree = 0
    for _ in range(300):
        x = rng.standard_normal(d) * rng.uniform(0.3, 2.5)
        y = rng.standard_normal(d) * rng.uniform(0.3, 2.5)
        in_ball = np.linalg.norm(y - x / 2.0) <= np.linalg.norm(x) / 2.0
        covered = paraboloid_contains(scale_point(x, lam),
                                      scale_point(y, lam))
        agree += covered == in_ball
    assert agree == 300


def test_extreme_points_on_circle():
    lam = 1e3
    angles = np.linspace(0.0, 2.0 * math.pi, 12, endpoint=False)
    pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    s = GaussianSample(2, lam, pts, (0,))
    assert set(extreme_points(s)) == set(range(12))


def test_origin_point_never_extreme():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    s = GaussianSample(2, 1e3, pts, (0,))
    assert 0 not in extreme_points(s)


def test_extreme_subset_of_hull_vertices():
    for r in range(50):
        s = sample_poisson_gaussian(100.0, 2, (34, r))
        hull_set = set(int(i) for i in
                       convex_hull(s.points).vertex_indices)
        assert set(int(i) for i in extreme_points(s)) <= hull_set


@given(st.integers(min_value=2, max_value=5),
       st.floats(min_value=8.0, max_value=20.0))
@settings(max_examples=40, deadline=None)
def test_round_trip_property(d, loglam):
    lam = math.exp(loglam)
    rng = substream((35, d, int(loglam * 1000)))
    x = rng.standard_normal(d)
    back = unscale_point(scale_point(x, lam))
    assert np.linalg.norm(back - x) <= 1e-9 * max(np.linalg.norm(x), 1.0)
