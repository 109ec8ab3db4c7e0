import math

import numpy as np
import pytest

from gausspoly.errors import (
    DegenerateInputError,
    GeneralPositionError,
    InvalidOriginError,
    InvalidParameterError,
)
from gausspoly.hull import (
    convex_hull,
    dump_polytope,
    f_vector,
    facet_solid_angle,
    facet_solid_angles_mc,
    is_vertex_oracle,
    polytope_volume,
    unit_ball_volume,
    vertex_face_incidence,
)
from gausspoly.sampler import substream

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
DIAMOND = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


def _euler(fv):
    return sum((-1) ** j * f for j, f in enumerate(fv))


def test_square_vertices_and_f_vector():
    p = convex_hull(SQUARE)
    assert set(p.vertex_indices) == {0, 1, 2, 3}
    assert p.n_facets == 4
    assert f_vector(p) == (4, 4)


def test_simplex_centroid_excluded():
    simplex = np.vstack([np.zeros(3), np.eye(3)])
    pts = np.vstack([simplex, simplex.mean(axis=0)])
    p = convex_hull(pts)
    assert set(p.vertex_indices) == {0, 1, 2, 3}
    assert 4 not in p.vertex_indices


def test_gaussian_cloud_matches_lp_oracle_d3():
    pts = substream((10,)).standard_normal((100, 3))
    p = convex_hull(pts)
    oracle = {i for i in range(100) if is_vertex_oracle(pts, i)}
    assert set(int(i) for i in p.vertex_indices) == oracle


def test_lp_oracle_collinear_middle_point():
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assert not is_vertex_oracle(pts, 1)
    assert is_vertex_oracle(pts, 0)
    assert is_vertex_oracle(pts, 2)


def test_lp_oracle_triangle_apex():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
    assert all(is_vertex_oracle(pts, i) for i in range(3))


def test_lp_oracle_agrees_on_random_cloud():
    pts = substream((11,)).standard_normal((20, 2))
    p = convex_hull(pts)
    hull_set = set(int(i) for i in p.vertex_indices)
    for i in range(20):
        assert is_vertex_oracle(pts, i) == (i in hull_set)


def test_simplex_f_vector():
    p = convex_hull(np.vstack([np.zeros(3), np.eye(3)]))
    assert f_vector(p) == (4, 6, 4)


def test_random_d3_simplicial_relations():
    for r in range(10):
        pts = substream((12, r)).standard_normal((60, 3))
        f0, f1, f2 = f_vector(convex_hull(pts))
        assert f1 == 3 * f0 - 6
        assert f2 == 2 * f0 - 4


def test_euler_relation_random_dims():
    for d in (2, 3, 4):
        for r in range(5):
            fv = f_vector(convex_hull(
                substream((13, d, r)).standard_normal((30, d))))
            assert _euler(fv) == 1 + (-1) ** (d - 1)
            if d == 2:
                assert fv[0] == fv[1]


def test_cube_volume():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1)
                        for z in (0, 1)], dtype=float)
    assert abs(polytope_volume(convex_hull(corners)) - 1.0) <= 1e-12


def test_standard_simplex_volume():
    for d in (2, 3, 4):
        p = convex_hull(np.vstack([np.zeros(d), np.eye(d)]))
        assert abs(polytope_volume(p) - 1.0 / math.factorial(d)) <= 1e-12


def test_volume_against_hit_or_miss():
    pts = substream((14,)).standard_normal((40, 2))
    p = convex_hull(pts)
    area = polytope_volume(p)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    box = np.prod(hi - lo)
    rng = substream((14, 1))
    shots = rng.uniform(lo, hi, size=(1_000_000, 2))
    inside = np.all(shots @ p.normals.T <= p.offsets, axis=1)
    frac = inside.mean()
    se = box * math.sqrt(frac * (1 - frac) / shots.shape[0])
    assert abs(area - box * frac) <= 3 * se


def test_volume_additivity_with_interior_point():
    pts = substream((15,)).standard_normal((30, 3))
    base = polytope_volume(convex_hull(pts))
    interior = pts[convex_hull(pts).vertex_indices].mean(axis=0)
    aug = polytope_volume(convex_hull(np.vstack([pts, interior])))
    assert abs(base - aug) <= 1e-12 * max(base, 1.0)


def test_vertex_face_incidence_square_and_simplex():
    sq = convex_hull(SQUARE)
    assert vertex_face_incidence(sq, 0, 1) == 2
    sx = convex_hull(np.vstack([np.zeros(3), np.eye(3)]))
    assert vertex_face_incidence(sx, 0, 2) == 3


def test_incidence_double_counting():
    p = convex_hull(substream((16,)).standard_normal((40, 3)))
    fv = f_vector(p)
    for j in range(3):
        total = sum(vertex_face_incidence(p, int(i), j)
                    for i in p.vertex_indices)
        assert total == (j + 1) * fv[j]


def test_incidence_zero_for_non_vertex():
    simplex = np.vstack([np.zeros(3), np.eye(3)])
    pts = np.vstack([simplex, simplex.mean(axis=0)])
    p = convex_hull(pts)
    assert vertex_face_incidence(p, 4, 0) == 0
    with pytest.raises(InvalidParameterError):
        vertex_face_incidence(p, 0, 3)


def test_diamond_facet_solid_angle_quarter():
    p = convex_hull(DIAMOND)
    for k in range(p.n_facets):
        sa = facet_solid_angle(p, k, np.zeros(2))
        assert abs(sa.fraction - 0.25) <= 1e-12


def test_octahedron_facet_solid_angle_eighth():
    p = convex_hull(np.vstack([np.eye(3), -np.eye(3)]))
    for k in range(p.n_facets):
        sa = facet_solid_angle(p, k, np.zeros(3))
        assert abs(sa.fraction - 0.125) <= 1e-12


def test_solid_angle_fractions_sum_to_one():
    for d, tol in ((2, 1e-12), (3, 1e-12)):
        p = convex_hull(substream((17, d)).standard_normal((25, d)))
        origin = p.points[p.vertex_indices].mean(axis=0)
        total = sum(facet_solid_angle(p, k, origin).fraction
                    for k in range(p.n_facets))
        assert abs(total - 1.0) <= tol


def test_mc_solid_angles_d4_cross_polytope():
    p = convex_hull(np.vstack([np.eye(4), -np.eye(4)]))
    frac, se = facet_solid_angles_mc(p, np.zeros(4), 1 << 16,
                                     substream((18,)))
    assert abs(frac.sum() - 1.0) <= 1e-15
    # all 16 facets congruent: each fraction near 1/16
    assert np.all(np.abs(frac - 1.0 / 16.0) <= 5 * np.maximum(se, 1e-4))


def test_mc_single_facet_meets_precision():
    p = convex_hull(np.vstack([np.eye(4), -np.eye(4)]))
    sa = facet_solid_angle(p, 0, np.zeros(4), precision=5e-2,
                           rng=substream((19,)))
    assert sa.stderr > 0.0
    assert abs(sa.fraction - 1.0 / 16.0) <= 5 * sa.stderr


def test_origin_must_be_interior():
    p = convex_hull(SQUARE)
    with pytest.raises(InvalidOriginError):
        facet_solid_angle(p, 0, np.array([5.0, 5.0]))


def test_degenerate_inputs_rejected():
    with pytest.raises(DegenerateInputError):
        convex_hull(np.array([[0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(GeneralPositionError):
        convex_hull(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0],
                              [3.0, 3.0]]))


def test_non_vertices_inside_all_facets():
    pts = substream((20,)).standard_normal((50, 2))
    p = convex_hull(pts)
    hull_set = set(int(i) for i in p.vertex_indices)
    inner = [i for i in range(50) if i not in hull_set]
    assert np.all(pts[inner] @ p.normals.T <= p.offsets + 1e-9)


def test_unit_ball_volume_values():
    assert abs(unit_ball_volume(2) - math.pi) <= 1e-15
    assert abs(unit_ball_volume(3) - 4.0 * math.pi / 3.0) <= 1e-14


def test_dump_polytope_json():
    import json

    p = convex_hull(SQUARE)
    doc = json.loads(dump_polytope(p))
    assert doc["d"] == 2
    assert doc["f_vector"] == [4, 4]
    assert abs(doc["volume"] - 1.0) <= 1e-12
    assert len(doc["facets"]) == 4
