"""Scaling transformation into tangent-height coordinates.

Points of R^d are mapped bijectively onto the window
W = R * B_{d-1}(0, pi) x (-infty, R^2], where R is the critical radius at
which hull vertices concentrate.  The first component is R times the inverse
exponential map applied to the direction of the point, the second is
R^2 * (1 - |x|/R).  The module also evaluates the exact rescaled intensity
densities, the up-paraboloid grain membership predicate and the
extreme-point criterion that characterizes hull vertices asymptotically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BelowThresholdError,
    ContextError,
    DomainError,
    InvalidParameterError,
)

__all__ = [
    "RescaledPoint",
    "critical_radius",
    "minimal_admissible_lambda",
    "scale_point",
    "unscale_point",
    "intensity_density",
    "radius_identity_sides",
    "paraboloid_contains",
    "extreme_points",
]

_WINDOW_SLACK = 1e-9


@dataclass(frozen=True)
class RescaledPoint:
    """Image (v, h) of a point under the scaling transformation."""

    v: np.ndarray  # (d-1,) tangent-plane coordinates
    h: float
    lam: float
    r_lambda: float

    @property
    def d(self) -> int:
        return self.v.shape[0] + 1

    def in_window(self, slack: float = _WINDOW_SLACK) -> bool:
        return (np.linalg.norm(self.v) <= math.pi * self.r_lambda + slack
                and self.h <= self.r_lambda ** 2 + slack)


def _radicand(lam: float, d: int) -> float:
    return 2.0 * math.log(lam) - math.log(2.0 ** (d + 1) * math.pi ** d
                                          * math.log(lam))


@lru_cache(maxsize=None)
def minimal_admissible_lambda(d: int) -> float:
    """Smallest lambda with a real critical radius >= 1 for this dimension.

    The radicand also exceeds 1 spuriously for lambda just above 1 (its
    log log lambda term diverges there), so the root is bracketed on the
    increasing branch log lambda >= 1/2, where the radicand is monotone.
    """
    lo, hi = math.exp(0.5), 1e12
    return brentq(lambda lam: _radicand(lam, d) - 1.0, lo, hi, xtol=1e-9)


def critical_radius(lam: float, d: int) -> float:
    """sqrt(2 log lam - log(2^{d+1} pi^d log lam)); admissible iff >= 1."""
    if int(d) < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {d}")
    d = int(d)
    if not lam >= minimal_admissible_lambda(d):
        raise BelowThresholdError(lam, d, minimal_admissible_lambda(d))
    return math.sqrt(_radicand(lam, d))


def _exp_map(v: np.ndarray) -> np.ndarray:
    """Exponential map from the tangent plane at u0=(0,..,0,1) to the sphere."""
    theta = np.linalg.norm(v)
    d = v.shape[0] + 1
    u = np.empty(d)
    if theta == 0.0:
        u[:-1] = 0.0
        u[-1] = 1.0
        return u
    u[:-1] = math.sin(theta) * (v / theta)
    u[-1] = math.cos(theta)
    return u


def _exp_inv(u: np.ndarray) -> np.ndarray:
    """Inverse exponential map; the antipode -u0 maps to (0, ..., 0, pi)."""
    perp = u[:-1]
    s = np.linalg.norm(perp)
    theta = math.atan2(s, u[-1])
    d = u.shape[0]
    v = np.zeros(d - 1)
    if s == 0.0:
        if u[-1] < 0.0:
            v[-1] = math.pi
        return v
    return (theta / s) * perp


def scale_point(x: np.ndarray, lam: float, d: int | None = None) -> RescaledPoint:
    """Map x in R^d to its tangent-height image; total on R^d."""
    x = np.asarray(x, dtype=float)
    if d is None:
        d = x.shape[0]
    r = critical_radius(lam, d)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return RescaledPoint(np.zeros(d - 1), r * r, float(lam), r)
    v = r * _exp_inv(x / norm)
    h = r * r - r * norm
    return RescaledPoint(v, h, float(lam), r)


def unscale_point(w: RescaledPoint) -> np.ndarray:
    """Exact inverse of ``scale_point``; raises outside the window."""
    if not w.in_window():
        raise DomainError(f"point (|v|={np.linalg.norm(w.v):g}, h={w.h:g}) "
                          f"outside window for lambda={w.lam:g}")
    r = w.r_lambda
    norm = (r * r - w.h) / r
    if norm == 0.0:
        return np.zeros(w.d)
    return norm * _exp_map(w.v / r)


def _sinc_factor(vnorm: float, r: float, d: int) -> float:
    """sin^{d-2}(|v|/R) / (|v|/R)^{d-2} with continuous extension at 0."""
    if d == 2:
        return 1.0
    t = vnorm / r
    if t == 0.0:
        return 1.0
    return (math.sin(t) / t) ** (d - 2)


def intensity_density(w: RescaledPoint, lam: float, mode: str) -> float:
    """Density at (v, h) of the rescaled process intensity.

    ``rescaled`` is the exact image density of lam times the Gaussian measure,
    ``limit`` its large-lambda pointwise limit e^h, and ``lebesgue-image`` the
    image density of R times the Lebesgue measure.
    """
    if mode == "limit":
        return math.exp(w.h)
    if mode not in ("rescaled", "lebesgue-image"):
        raise InvalidParameterError(f"unknown density mode {mode!r}")
    r = critical_radius(lam, w.d)
    if not w.in_window(slack=0.0):
        return 0.0
    vnorm = float(np.linalg.norm(w.v))
    base = _sinc_factor(vnorm, r, w.d) * (1.0 - w.h / r ** 2) ** (w.d - 1)
    if mode == "lebesgue-image":
        return base
    return (base * math.sqrt(2.0 * math.log(lam)) / r
            * math.exp(w.h - w.h ** 2 / (2.0 * r ** 2)))


def radius_identity_sides(u: np.ndarray, h: float, lam: float, d: int):
    """Both sides of the defining identity of the critical radius.

    Left: lam times the Gaussian density at u * R * (1 - h/R^2) for a unit
    vector u.  Right: sqrt(2 log lam) * exp(h - h^2 / (2 R^2)).  The two agree
    identically; evaluating them through separate code paths makes the
    agreement a checkable property.
    """
    r = critical_radius(lam, d)
    x = np.asarray(u, dtype=float) * (r * (1.0 - h / r ** 2))
    nsq = float(x @ x)
    left = lam * (2.0 * math.pi) ** (-d / 2.0) * math.exp(-nsq / 2.0)
    right = math.sqrt(2.0 * math.log(lam)) * math.exp(h - h ** 2 / (2.0 * r ** 2))
    return left, right


def _geodesic_distance(v1: np.ndarray, v2: np.ndarray, r: float) -> float:
    """Sphere distance between exp(v1/R) and exp(v2/R).

    Uses the two-argument arctangent of the chord geometry; arccos of a dot
    product loses precision near 0 and pi.
    """
    u1 = _exp_map(v1 / r)
    u2 = _exp_map(v2 / r)
    return 2.0 * math.asin(min(1.0, 0.5 * float(np.linalg.norm(u1 - u2))))


def paraboloid_contains(apex: RescaledPoint, query: RescaledPoint) -> bool:
    """Membership of ``query`` in the up-paraboloid grain with this apex."""
    if apex.lam != query.lam:
        raise ContextError(
            f"mismatched lambda contexts: {apex.lam:g} vs {query.lam:g}")
    r = apex.r_lambda
    cosd = math.cos(_geodesic_distance(query.v, apex.v, r))
    return query.h >= r * r * (1.0 - cosd) + apex.h * cosd


def extreme_points(sample) -> np.ndarray:
    """Indices of sample points not covered by any other point's grain.

    In original coordinates a point x is extreme iff <x, y> < |x|^2 for every
    other sample point y; boundary contact counts as covered.  The result is
    a subset of the convex hull vertices.
    """
    pts = sample.points
    n = pts.shape[0]
    if n == 0:
        return np.array([], dtype=int)
    sq = np.einsum("ij,ij->i", pts, pts)
    extreme = np.ones(n, dtype=bool)
    chunk = max(1, int(2e7) // max(n, 1))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        g = pts[start:stop] @ pts.T  # (chunk, n)
        g[np.arange(stop - start), np.arange(start, stop)] = -np.inf
        extreme[start:stop] = np.max(g, axis=1) < sq[start:stop]
    return np.flatnonzero(extreme)
