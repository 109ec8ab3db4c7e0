"""Convex hulls in arbitrary fixed dimension with simplicial face structure.

Hull construction is delegated to Qhull (via scipy), which returns simplicial
facets with outward normals for points in general position; an independent
linear-programming vertex oracle provides the cross-check used by the test
suite.  Faces of every dimension are enumerated as subsets of facet vertex
sets, which is valid because all proper faces of a simplicial polytope are
simplices spanned by such subsets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull as _QhullConvexHull
from scipy.spatial import QhullError

from .errors import (
    DegenerateInputError,
    GeneralPositionError,
    InvalidOriginError,
    InvalidParameterError,
)

__all__ = [
    "Polytope",
    "unit_ball_volume",
    "convex_hull",
    "is_vertex_oracle",
    "f_vector",
    "polytope_volume",
    "vertex_face_incidence",
    "facet_solid_angle",
    "facet_solid_angles_mc",
    "dump_polytope",
]


def unit_ball_volume(d: int) -> float:
    """Volume of the d-dimensional unit ball."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass
class Polytope:
    """Simplicial convex hull of a point configuration.

    ``facets`` indexes into the original ``points`` array; ``normals`` are
    outward unit normals with ``normal . x <= offset`` for interior x.
    """

    d: int
    points: np.ndarray          # original input, (n, d)
    vertex_indices: np.ndarray  # hull vertices as original indices
    facets: np.ndarray          # (n_facets, d) original indices
    normals: np.ndarray         # (n_facets, d)
    offsets: np.ndarray         # (n_facets,)
    _faces: dict = field(default_factory=dict, repr=False)
    _f_vector: tuple | None = field(default=None, repr=False)
    _volume: float | None = field(default=None, repr=False)

    @property
    def n_facets(self) -> int:
        return self.facets.shape[0]

    @property
    def vertex_set(self) -> frozenset:
        return frozenset(int(i) for i in self.vertex_indices)

    def faces(self, j: int) -> set:
        """All j-faces as sorted vertex-index tuples."""
        if not 0 <= j <= self.d - 1:
            raise InvalidParameterError(f"face dimension {j} outside [0, {self.d - 1}]")
        if j not in self._faces:
            found = set()
            for facet in self.facets:
                for comb in combinations(sorted(int(i) for i in facet), j + 1):
                    found.add(comb)
            self._faces[j] = found
        return self._faces[j]

    def contains_origin(self) -> bool:
        """True iff 0 is strictly interior."""
        return bool(np.all(self.offsets > 0.0))

    def facets_at_vertex(self, index: int) -> np.ndarray:
        """Row indices of facets containing the given original point index."""
        return np.flatnonzero(np.any(self.facets == index, axis=1))


def convex_hull(points: np.ndarray) -> Polytope:
    """Simplicial hull of at least d+1 points in general position."""
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    if n < d + 1:
        raise DegenerateInputError(
            f"need at least {d + 1} points in R^{d}, got {n}")
    try:
        qh = _QhullConvexHull(points, qhull_options="Qt")
    except QhullError as exc:
        raise GeneralPositionError(f"Qhull rejected the input: {exc}") from exc
    if qh.simplices.shape[1] != d:
        raise GeneralPositionError("non-simplicial facet produced")
    normals = qh.equations[:, :d].copy()
    offsets = -qh.equations[:, d].copy()
    return Polytope(
        d=d,
        points=points,
        vertex_indices=np.sort(qh.vertices.copy()),
        facets=qh.simplices.copy(),
        normals=normals,
        offsets=offsets,
    )


def is_vertex_oracle(points: np.ndarray, index: int) -> bool:
    """True iff the point is not a convex combination of the others.

    Decided by a linear-programming feasibility solve, independent of the
    hull construction path.
    """
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    if not 0 <= index < n:
        raise IndexError(index)
    if n == 1:
        return True
    others = np.delete(points, index, axis=0)
    target = points[index]
    a_eq = np.vstack([others.T, np.ones(n - 1)])
    b_eq = np.append(target, 1.0)
    res = linprog(np.zeros(n - 1), A_eq=a_eq, b_eq=b_eq,
                  bounds=(0.0, None), method="highs")
    return not res.success


def f_vector(p: Polytope) -> tuple:
    """(f_0, ..., f_{d-1}) face counts of a simplicial polytope."""
    if p._f_vector is None:
        p._f_vector = tuple(len(p.faces(j)) for j in range(p.d))
    return p._f_vector


def polytope_volume(p: Polytope) -> float:
    """Sum of simplex volumes |det| / d! over facets coned to the vertex
    centroid."""
    if p._volume is None:
        ref = p.points[p.vertex_indices].mean(axis=0)
        mats = p.points[p.facets] - ref  # (n_facets, d, d)
        dets = np.abs(np.linalg.det(mats))
        p._volume = float(dets.sum() / math.factorial(p.d))
    return p._volume


def vertex_face_incidence(p: Polytope, index: int, j: int) -> int:
    """Number of j-faces containing the given point; 0 for non-vertices."""
    if not 0 <= j <= p.d - 1:
        raise InvalidParameterError(f"face dimension {j} outside [0, {p.d - 1}]")
    if int(index) not in p.vertex_set:
        return 0
    idx = int(index)
    return sum(1 for face in p.faces(j) if idx in face)


def _check_interior(p: Polytope, origin: np.ndarray) -> np.ndarray:
    origin = np.asarray(origin, dtype=float)
    if not np.all(p.normals @ origin < p.offsets):
        raise InvalidOriginError("origin is not strictly inside the polytope")
    return origin


def _solid_angle_2d(a: np.ndarray, b: np.ndarray) -> float:
    cross = a[0] * b[1] - a[1] * b[0]
    dot = float(a @ b)
    return abs(math.atan2(cross, dot)) / (2.0 * math.pi)


def _solid_angle_3d(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Spherical-excess formula of Van Oosterom and Strackee."""
    la, lb, lc = (np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(c))
    num = float(np.linalg.det(np.stack([a, b, c])))
    den = (la * lb * lc + float(a @ b) * lc + float(a @ c) * lb
           + float(b @ c) * la)
    omega = 2.0 * abs(math.atan2(num, den))
    return omega / (4.0 * math.pi)


def facet_solid_angles_mc(p: Polytope, origin: np.ndarray, n_dirs: int,
                          rng: np.random.Generator):
    """Monte Carlo solid-angle fractions for all facets at once.

    Each sampled direction is assigned to the facet its ray exits through, so
    the fractions sum to one exactly.  Returns (fractions, standard errors).
    """
    origin = _check_interior(p, origin)
    counts = np.zeros(p.n_facets, dtype=np.int64)
    shifted_offsets = p.offsets - p.normals @ origin  # all > 0
    chunk = max(1, int(2e7) // max(p.n_facets, 1))
    remaining = int(n_dirs)
    while remaining > 0:
        m = min(chunk, remaining)
        u = rng.standard_normal((m, p.d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        proj = u @ p.normals.T  # (m, n_facets)
        with np.errstate(divide="ignore"):
            t = np.where(proj > 0.0, shifted_offsets / proj, np.inf)
        hits = np.argmin(t, axis=1)
        counts += np.bincount(hits, minlength=p.n_facets)
        remaining -= m
    frac = counts / float(n_dirs)
    se = np.sqrt(frac * (1.0 - frac) / float(n_dirs))
    return frac, se


@dataclass(frozen=True)
class SolidAngle:
    fraction: float
    stderr: float = 0.0


def facet_solid_angle(p: Polytope, facet_index: int, origin: np.ndarray,
                      precision: float = 1e-3,
                      rng: np.random.Generator | None = None) -> SolidAngle:
    """Fraction of the full sphere subtended at ``origin`` by one facet cone.

    Closed form for d=2 (planar angle) and d=3 (spherical excess); Monte
    Carlo direction sampling with a reported standard error for d >= 4, run
    until the relative error target is met or a sample-size cap is reached.
    """
    origin = _check_interior(p, origin)
    verts = p.points[p.facets[facet_index]] - origin
    if p.d == 2:
        return SolidAngle(_solid_angle_2d(verts[0], verts[1]))
    if p.d == 3:
        return SolidAngle(_solid_angle_3d(verts[0], verts[1], verts[2]))
    if rng is None:
        rng = np.random.default_rng(0)
    n = 1 << 14
    cap = 1 << 23
    while True:
        frac, se = facet_solid_angles_mc(p, origin, n, rng)
        f, s = float(frac[facet_index]), float(se[facet_index])
        if f > 0.0 and s <= precision * f:
            return SolidAngle(f, s)
        if n >= cap:
            return SolidAngle(f, s)
        n *= 2


def dump_polytope(p: Polytope) -> str:
    """JSON dump with vertices, facets (indices + normal + offset), f-vector
    and volume."""
    doc = {
        "d": p.d,
        "vertices": [
            {"index": int(i), "coordinates": [float(x) for x in p.points[i]]}
            for i in p.vertex_indices
        ],
        "facets": [
            {
                "indices": [int(i) for i in p.facets[k]],
                "normal": [float(x) for x in p.normals[k]],
                "offset": float(p.offsets[k]),
            }
            for k in range(p.n_facets)
        ],
        "f_vector": list(f_vector(p)),
        "volume": polytope_volume(p),
    }
    return json.dumps(doc, indent=2)
