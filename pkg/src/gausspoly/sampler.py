"""Poisson point configurations with Gaussian intensity.

A configuration with intensity parameter ``lam`` has a Poisson(lam) number of
points drawn i.i.d. from the standard Gaussian law on R^d.  Configurations at
increasing intensities can be coupled monotonically by superposing fresh
Poisson increments, so the point set at a higher level is a superset of every
lower level.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, OrderingError

__all__ = [
    "GaussianSample",
    "CoupledSamplePath",
    "substream",
    "sample_poisson_gaussian",
    "extend_sample",
    "write_sample",
    "read_sample",
]


def substream(seed_path) -> np.random.Generator:
    """Deterministic counter-based RNG substream for an integer seed path.

    Philox is counter-based, so disjoint seed paths give independent streams
    and the map from ``seed_path`` to the stream is pure.
    """
    path = tuple(int(s) for s in seed_path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(path)))


def _draw_points(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    points = rng.standard_normal((count, d))
    # Exact duplicates are a probability-zero event; resample the collider to
    # preserve general position.
    while count > 1:
        _, first = np.unique(points, axis=0, return_index=True)
        if first.size == count:
            break
        dup = np.setdiff1d(np.arange(count), first)
        points[dup] = rng.standard_normal((dup.size, d))
    return points


@dataclass(frozen=True)
class GaussianSample:
    """One realization of the Poisson-Gaussian process."""

    d: int
    lam: float
    points: np.ndarray
    seed_path: tuple

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass
class CoupledSamplePath:
    """Monotone coupling of samples across increasing intensities.

    ``increments[i]`` holds the fresh points that arrive between level ``i-1``
    and level ``i``; the sample at any level is the union of the base points
    and all increments up to that level.
    """

    base: GaussianSample
    increments: list = field(default_factory=list)  # [(lam_i, points_i), ...]

    @property
    def levels(self) -> list:
        return [self.base.lam] + [lam for lam, _ in self.increments]

    @property
    def top_intensity(self) -> float:
        return self.levels[-1]

    def sample_at(self, level: int) -> GaussianSample:
        """Union sample at ``levels[level]``."""
        lam = self.levels[level]
        parts = [self.base.points] + [p for _, p in self.increments[:level]]
        pts = np.vstack(parts) if len(parts) > 1 else self.base.points.copy()
        return GaussianSample(self.base.d, lam, pts,
                              self.base.seed_path + (level,))


def sample_poisson_gaussian(lam: float, d: int, seed) -> GaussianSample:
    """Draw a Poisson(lam) number of i.i.d. standard Gaussian points in R^d.

    ``seed`` is a sequence of integers identifying the replicate; identical
    (lam, d, seed) reproduce bit-identical output.
    """
    if not lam > 0:
        raise InvalidParameterError(f"lambda must be positive, got {lam}")
    if int(d) < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {d}")
    d = int(d)
    seed_path = tuple(int(s) for s in (seed if np.iterable(seed) else (seed,)))
    rng = substream(seed_path)
    count = int(rng.poisson(lam))
    points = _draw_points(rng, count, d)
    return GaussianSample(d, float(lam), points, seed_path)


def extend_sample(path, lam_next: float, seed) -> CoupledSamplePath:
    """Append the Poisson increment that raises a coupled path to ``lam_next``.

    Accepts a ``GaussianSample`` (starting a path) or a ``CoupledSamplePath``.
    The union at the new level has marginal Poisson(lam_next) count.
    """
    if isinstance(path, GaussianSample):
        path = CoupledSamplePath(base=path)
    top = path.top_intensity
    if not lam_next > top:
        raise OrderingError(
            f"lam_next={lam_next:g} must strictly exceed the current top "
            f"intensity {top:g}")
    seed_path = tuple(int(s) for s in (seed if np.iterable(seed) else (seed,)))
    rng = substream(seed_path)
    count = int(rng.poisson(lam_next - top))
    points = _draw_points(rng, count, path.base.d)
    path.increments.append((float(lam_next), points))
    return path


def write_sample(sample: GaussianSample, fh) -> None:
    """Line-oriented text dump: header ``d lambda count seed_path``, then one
    point per line with round-trip precision."""
    seed_str = ",".join(str(s) for s in sample.seed_path)
    fh.write(f"{sample.d} {sample.lam!r} {sample.count} {seed_str}\n")
    for row in sample.points:
        fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_sample(fh) -> GaussianSample:
    header = fh.readline().split()
    d, lam, count = int(header[0]), float(header[1]), int(header[2])
    seed_path = tuple(int(s) for s in header[3].split(",")) if len(header) > 3 else ()
    if count == 0:
        points = np.empty((0, d))
    else:
        points = np.loadtxt(io.StringIO(fh.read()), ndmin=2).reshape(count, d)
    return GaussianSample(d, lam, points, seed_path)
