"""Per-vertex geometric functionals and their empirical measures.

The defect-volume functional assigns to each hull vertex its share of the
volume the hull misses relative to the centred ball of critical radius,
decomposed over the simplicial cones spanned by the facets at that vertex.
The j-face functionals assign |F_j(x)| / (j+1), so the weights sum exactly
to the j-face count.  Atoms pair with bounded test functions on the sphere,
radially extended by f(x) := f(x / |x|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import hull as _hull
from . import rescale as _rescale
from .errors import InvalidParameterError

__all__ = [
    "FunctionalAtoms",
    "TestFunction",
    "constant_one",
    "coordinate",
    "quadratic_harmonic",
    "cap_bump",
    "test_function_library",
    "xi_volume",
    "xi_face",
    "pair",
    "atoms_to_csv",
]


@dataclass
class FunctionalAtoms:
    """Weighted atoms at hull vertices for one functional.

    ``weights`` align with ``indices``/``points``.  For face functionals the
    weights are exact rationals; for the defect-volume functional they are
    floats (or None when per-vertex values are unavailable because the origin
    is not interior, in which case only ``total`` is meaningful).
    """

    tag: str
    indices: list
    points: np.ndarray
    weights: list
    lam: float
    r_lambda: float
    total: object = None         # exact total mass where applicable
    per_vertex_available: bool = True
    solid_angle_se: float = 0.0  # aggregate MC error of the weights, d >= 4

    def total_mass(self):
        if self.total is not None:
            return self.total
        return sum(self.weights)


@dataclass(frozen=True)
class TestFunction:
    """Bounded function on the unit sphere, extended radially; f(0) := 0."""

    name: str
    on_sphere: object  # callable unit-vector -> float

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return 0.0
        return float(self.on_sphere(x / norm))


def constant_one() -> TestFunction:
    return TestFunction("one", lambda u: 1.0)


def coordinate(i: int) -> TestFunction:
    return TestFunction(f"u{i}", lambda u: float(u[i]))


def quadratic_harmonic(i: int, j: int) -> TestFunction:
    """Degree-2 spherical harmonic u_i u_j - delta_ij / d."""
    def f(u):
        if i == j:
            return float(u[i] * u[j]) - 1.0 / u.shape[0]
        return float(u[i] * u[j])
    return TestFunction(f"h2_{i}{j}", f)


def cap_bump(width: float = 0.5) -> TestFunction:
    """Smooth bump supported on the cap around u0 = (0, ..., 0, 1)."""
    def f(u):
        t = (1.0 - float(u[-1])) / width
        if t >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - t * t))
    return TestFunction(f"bump{width:g}", f)


def test_function_library(d: int) -> dict:
    lib = {"one": constant_one(), "bump": cap_bump()}
    for i in range(d):
        fi = coordinate(i)
        lib[fi.name] = fi
    for i in range(d):
        for j in range(i, d):
            fij = quadratic_harmonic(i, j)
            lib[fij.name] = fij
    return lib


def _cone_simplex_volumes(p, origin: np.ndarray) -> np.ndarray:
    """vol(conv(origin, facet)) for every facet."""
    mats = p.points[p.facets] - origin
    return np.abs(np.linalg.det(mats)) / math.factorial(p.d)


def xi_volume(sample, p, n_dirs: int = 1 << 16,
              rng: np.random.Generator | None = None) -> FunctionalAtoms:
    """Defect-volume atoms at the hull vertices.

    Per facet F the cone contributes fraction(F) * kappa_d * R^d minus
    vol(conv(0, F)); the (1/d) * R prefactor distributed over the d facet
    vertices reproduces the per-vertex functional for simplicial hulls.
    Contributions are signed: facets protruding outside the critical ball
    contribute negative terms, and the total identity holds as a signed sum.
    """
    d = sample.d
    r = _rescale.critical_radius(sample.lam, d)
    kappa = _hull.unit_ball_volume(d)
    ball_vol = kappa * r ** d
    vol_k = _hull.polytope_volume(p)
    origin = np.zeros(d)

    if not p.contains_origin():
        return FunctionalAtoms(
            tag="xi_V", indices=[], points=np.empty((0, d)), weights=[],
            lam=sample.lam, r_lambda=r, total=r * (ball_vol - vol_k),
            per_vertex_available=False)

    se_total = 0.0
    if d == 2:
        fracs = np.array([
            _hull._solid_angle_2d(*(p.points[f] - origin)) for f in p.facets])
    elif d == 3:
        fracs = np.array([
            _hull._solid_angle_3d(*(p.points[f] - origin)) for f in p.facets])
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        fracs, ses = _hull.facet_solid_angles_mc(p, origin, n_dirs, rng)
        se_total = float(np.sqrt(np.sum(ses ** 2))) * ball_vol

    cone_ball = fracs * ball_vol
    cone_hull = _cone_simplex_volumes(p, origin)
    per_facet = cone_ball - cone_hull  # signed

    weights = {int(i): 0.0 for i in p.vertex_indices}
    for k, facet in enumerate(p.facets):
        share = (r / d) * per_facet[k]
        for i in facet:
            weights[int(i)] += share

    indices = sorted(weights)
    return FunctionalAtoms(
        tag="xi_V",
        indices=indices,
        points=p.points[indices],
        weights=[weights[i] for i in indices],
        lam=sample.lam,
        r_lambda=r,
        solid_angle_se=se_total,
    )


def xi_face(sample, p, j: int) -> FunctionalAtoms:
    """j-face atoms: weight |F_j(x)| / (j+1) at each hull vertex."""
    d = sample.d
    if not 0 <= j <= d - 1:
        raise InvalidParameterError(f"face dimension {j} outside [0, {d - 1}]")
    r = _rescale.critical_radius(sample.lam, d)
    counts = {int(i): 0 for i in p.vertex_indices}
    for face in p.faces(j):
        for i in face:
            counts[i] += 1
    indices = sorted(counts)
    weights = [Fraction(counts[i], j + 1) for i in indices]
    total = sum(weights)
    assert total.denominator == 1
    return FunctionalAtoms(
        tag=f"xi_f{j}",
        indices=indices,
        points=p.points[indices],
        weights=weights,
        lam=sample.lam,
        r_lambda=r,
        total=total,
    )


def pair(atoms: FunctionalAtoms, f: TestFunction, r: float):
    """<f_r, mu> = sum of weight * f(x / r) over the atoms.

    With f identically one this is the total mass, returned exactly when the
    weights are exact.
    """
    if not r > 0:
        raise InvalidParameterError(f"r must be positive, got {r}")
    if not atoms.per_vertex_available:
        raise InvalidParameterError(
            "per-vertex atoms unavailable (origin not interior); "
            "only the total mass is defined")
    values = [f(x / r) for x in atoms.points]
    if all(v == 1.0 for v in values):
        total = atoms.total_mass()
        return float(total) if isinstance(total, Fraction) else total
    return math.fsum(float(w) * v for w, v in zip(atoms.weights, values))


def atoms_to_csv(atoms: FunctionalAtoms, fh) -> None:
    """CSV rows ``vertex_index, x_1..x_d, weight``."""
    d = atoms.points.shape[1] if atoms.points.size else 0
    fh.write("vertex_index," + ",".join(f"x_{k + 1}" for k in range(d))
             + ",weight\n")
    for i, x, w in zip(atoms.indices, atoms.points, atoms.weights):
        coords = ",".join(repr(float(c)) for c in x)
        fh.write(f"{i},{coords},{float(w)!r}\n")
