import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gausspoly.errors import InvalidParameterError, OrderingError
from gausspoly.sampler import (
    CoupledSamplePath,
    GaussianSample,
    extend_sample,
    read_sample,
    sample_poisson_gaussian,
    substream,
    write_sample,
)


def test_tiny_intensity_gives_empty_sample():
    s = sample_poisson_gaussian(1e-9, 2, seed=0)
    assert s.count == 0
    assert s.points.shape == (0, 2)


def test_mean_count_matches_intensity():
    counts = [sample_poisson_gaussian(100.0, 2, seed=(1, r)).count
              for r in range(10_000)]
    assert 97.0 <= np.mean(counts) <= 103.0


def test_same_seed_reproduces_bit_identical_points():
    a = sample_poisson_gaussian(50.0, 3, seed=(7, 3))
    b = sample_poisson_gaussian(50.0, 3, seed=(7, 3))
    assert a.count == b.count
    assert np.array_equal(a.points, b.points)


def test_invalid_parameters_rejected():
    with pytest.raises(InvalidParameterError):
        sample_poisson_gaussian(0.0, 2, seed=0)
    with pytest.raises(InvalidParameterError):
        sample_poisson_gaussian(-1.0, 2, seed=0)
    with pytest.raises(InvalidParameterError):
        sample_poisson_gaussian(10.0, 0, seed=0)


def test_extend_requires_strict_increase():
    base = sample_poisson_gaussian(50.0, 2, seed=0)
    with pytest.raises(OrderingError):
        extend_sample(base, 50.0, seed=1)
    with pytest.raises(OrderingError):
        extend_sample(base, 20.0, seed=1)


def test_extension_union_count_is_poisson_at_top_level():
    counts = []
    for r in range(10_000):
        path = extend_sample(sample_poisson_gaussian(50.0, 2, (2, r, 0)),
                             100.0, (2, r, 1))
        counts.append(path.sample_at(1).count)
    assert 97.0 <= np.mean(counts) <= 103.0


def test_coupled_levels_are_supersets():
    path = extend_sample(sample_poisson_gaussian(50.0, 2, (3, 0)),
                         100.0, (3, 1))
    lo = path.sample_at(0).points
    hi = path.sample_at(1).points
    assert lo.shape[0] <= hi.shape[0]
    assert np.array_equal(hi[: lo.shape[0]], lo)
    assert path.levels == [50.0, 100.0]
    assert path.top_intensity == 100.0


def test_union_count_chi_square_goodness_of_fit():
    counts = np.array([
        extend_sample(sample_poisson_gaussian(40.0, 1, (4, r, 0)),
                      100.0, (4, r, 1)).sample_at(1).count
        for r in range(10_000)])
    # bin the Poisson(100) law so every expected cell count is >= 5
    edges = [0, 80, 85, 90, 95, 100, 105, 110, 115, 120, 1000]
    observed = np.histogram(counts, bins=edges)[0]
    probs = np.diff([stats.poisson.cdf(e - 1, 100.0) for e in edges])
    _, p = stats.chisquare(observed, probs * counts.size)
    assert p > 0.01


def test_isotropy_of_point_law():
    pts = np.vstack([sample_poisson_gaussian(200.0, 3, (5, r)).points
                     for r in range(200)])
    se = pts.std(axis=0, ddof=1) / np.sqrt(pts.shape[0])
    assert np.all(np.abs(pts.mean(axis=0)) <= 3.0 * se)


def test_points_finite_and_distinct():
    s = sample_poisson_gaussian(500.0, 2, seed=6)
    assert np.all(np.isfinite(s.points))
    assert np.unique(s.points, axis=0).shape[0] == s.count


def test_points_are_read_only():
    s = sample_poisson_gaussian(50.0, 2, seed=0)
    with pytest.raises(ValueError):
        s.points[0, 0] = 0.0


@given(st.lists(st.integers(min_value=0, max_value=2**31 - 1),
                min_size=1, max_size=4))
@settings(max_examples=25, deadline=None)
def test_substream_is_pure(path):
    a = substream(path).standard_normal(4)
    b = substream(path).standard_normal(4)
    assert np.array_equal(a, b)


def test_serialization_round_trip():
    s = sample_poisson_gaussian(30.0, 3, seed=(9, 1))
    buf = io.StringIO()
    write_sample(s, buf)
    buf.seek(0)
    back = read_sample(buf)
    assert back.d == s.d and back.lam == s.lam
    assert back.seed_path == s.seed_path
    assert np.array_equal(back.points, s.points)


def test_empty_sample_serialization():
    s = GaussianSample(2, 1e-9, np.empty((0, 2)), (0,))
    buf = io.StringIO()
    write_sample(s, buf)
    buf.seek(0)
    back = read_sample(buf)
    assert back.count == 0 and back.points.shape == (0, 2)


def test_extend_accepts_existing_path():
    path = extend_sample(sample_poisson_gaussian(30.0, 2, (8, 0)),
                         60.0, (8, 1))
    assert isinstance(path, CoupledSamplePath)
    path = extend_sample(path, 120.0, (8, 2))
    assert path.levels == [30.0, 60.0, 120.0]
    counts = [path.sample_at(k).count for k in range(3)]
    assert counts == sorted(counts)
