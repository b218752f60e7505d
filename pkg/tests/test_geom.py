import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hullwrap.errors import DegenerateFacetError
from hullwrap.geom import (
    centroid_distance,
    is_degenerate,
    orient2d,
    orientation,
    orientation_many,
    point_triangle_distance,
    point_triangle_distance2_many,
    shared_corners,
    signed_tet_volume,
    triangle_area,
    triangles_intersect,
    triangles_intersect_many,
)

import oracles

O, X, Y, Z = (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)

small = st.integers(-3, 3).map(float)
pt = st.tuples(small, small, small)
real = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
rpt = st.tuples(real, real, real)


# -- orientation ---------------------------------------------------------

def test_orientation_unit_tetrahedron():
    assert orientation(O, X, Y, Z) == 1


def test_orientation_coplanar():
    assert orientation(O, X, Y, (1.0, 1.0, 0.0)) == 0


def test_orientation_mirror():
    assert orientation(O, X, Y, (0.0, 0.0, -1.0)) == -1


def test_orientation_survives_tiny_offsets():
    # float determinant is dominated by rounding here; the sign must not be
    p = (0.1, 0.2, 0.3)
    q = (0.1 + 1e-15, 0.2, 0.3)
    r = (0.1, 0.2 + 1e-15, 0.3)
    s = (0.1, 0.2, 0.3 + 1e-15)
    assert orientation(p, q, r, s) == oracles.exact_orientation(p, q, r, s) == 1


def test_orientation_nearly_coplanar_grid():
    # points on the plane x + y + z = 1 are coplanar in rationals only when exact
    rng = np.random.default_rng(0)
    base = [(0.5, 0.25, 0.25), (0.125, 0.375, 0.5), (0.75, 0.125, 0.125)]
    for _ in range(200):
        u, v = rng.random(2)
        s = (u, v, 1.0 - u - v)
        assert orientation(*base, s) == oracles.exact_orientation(*base, s)


@given(pt, pt, pt, pt)
def test_orientation_matches_rationals_on_grid(p, q, r, s):
    assert orientation(p, q, r, s) == oracles.exact_orientation(p, q, r, s)


@settings(max_examples=300)
@given(rpt, rpt, rpt, st.floats(0, 1), st.floats(0, 1))
def test_orientation_near_plane(p, q, r, u, v):
    # a point built on the plane of p, q, r; rounding puts it just off
    s = tuple(p[i] + u * (q[i] - p[i]) + v * (r[i] - p[i]) for i in range(3))
    assert orientation(p, q, r, s) == oracles.exact_orientation(p, q, r, s)


@given(pt, pt, pt, pt)
def test_orientation_antisymmetric(p, q, r, s):
    assert orientation(p, q, r, s) == -orientation(q, p, r, s)


def test_orientation_many_matches_scalar():
    rng = np.random.default_rng(1)
    pts = rng.integers(-2, 3, size=(500, 4, 3)).astype(float)
    got = orientation_many(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
    want = [orientation(*map(tuple, row)) for row in pts]
    assert got.tolist() == want


def test_orient2d_ccw():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (1, 0), (2, 0)) == 0
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1


# -- distances -----------------------------------------------------------

T = (O, X, Y)


def test_distance_barycenter_is_zero():
    assert point_triangle_distance((1 / 3, 1 / 3, 0.0), T) == 0.0


def test_distance_perpendicular_foot():
    assert point_triangle_distance((0.0, 0.0, 1.0), T) == 1.0


def test_distance_to_edge_midpoint():
    assert point_triangle_distance((2.0, 2.0, 0.0), T) == pytest.approx(3 / math.sqrt(2), rel=1e-15)


def test_distance_degenerate_triangle_rejected():
    with pytest.raises(DegenerateFacetError):
        point_triangle_distance(Z, (O, X, (2.0, 0.0, 0.0)))


@settings(max_examples=200)
@given(rpt, rpt, rpt, rpt)
def test_distance_matches_reference(p, a, b, c):
    t = (a, b, c)
    if is_degenerate(t) or triangle_area(t) < 1e-3:
        return
    want = oracles.point_triangle_distance_bf(p, t)
    assert point_triangle_distance(p, t) == pytest.approx(want, rel=1e-9, abs=1e-9)
    d2 = point_triangle_distance2_many(np.array(p), np.array(a), np.array(b), np.array(c))
    assert math.sqrt(float(d2)) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_centroid_distance_examples():
    assert centroid_distance((1 / 3, 1 / 3, 0.0), T) == pytest.approx(0.0, abs=1e-16)
    t = (O, (3.0, 0.0, 0.0), (0.0, 3.0, 0.0))
    assert centroid_distance((0.0, 0.0, 3.0), t) == pytest.approx(math.sqrt(11), rel=1e-15)


@given(rpt, rpt, rpt, rpt)
def test_centroid_distance_matches_direct(p, a, b, c):
    t = (a, b, c)
    if is_degenerate(t):
        return
    g = (np.array(a) + np.array(b) + np.array(c)) / 3
    assert centroid_distance(p, t) == pytest.approx(float(np.linalg.norm(np.array(p) - g)), rel=1e-12, abs=1e-12)


# -- measures ------------------------------------------------------------

def test_area_unit_right_triangle():
    assert triangle_area(T) == 0.5


@given(rpt)
def test_tetrahedron_volume_from_any_origin(o):
    facets = [(O, Y, X), (O, X, Z), (X, Y, Z), (Y, O, Z)]
    vol = math.fsum(signed_tet_volume(o, f) for f in facets)
    assert vol == pytest.approx(1 / 6, rel=1e-9, abs=1e-9)


def test_degeneracy_threshold():
    assert is_degenerate((O, X, (2.0, 0.0, 0.0)))
    assert is_degenerate((O, O, X))
    assert not is_degenerate(T)
    assert is_degenerate((O, X, (0.5, 1e-13, 0.0)))


# -- triangle contact ----------------------------------------------------

def test_parallel_planes_do_not_meet():
    t2 = tuple((x, y, z + 1.0) for x, y, z in T)
    assert not triangles_intersect(T, t2)


def test_shared_edge_opposite_sides_allowed():
    t1 = (O, X, Y)
    t2 = (X, O, (0.3, -0.2, 0.5))
    assert not triangles_intersect(t1, t2, shared_corners((0, 1, 2), (1, 0, 3)))


def test_piercing_triangle_detected():
    t1 = ((-1.0, -1.0, 0.0), (2.0, -1.0, 0.0), (-1.0, 2.0, 0.0))
    t2 = ((0.2, 0.2, -1.0), (0.3, 0.2, 1.0), (0.2, 0.3, 1.0))
    assert triangles_intersect(t1, t2)
    assert oracles.forbidden_contact(t1, t2, (0, 1, 2), (3, 4, 5))


def test_coplanar_overlap_across_shared_edge():
    t1 = (O, X, Y)
    t2 = (X, O, (0.5, 0.5, 0.0))
    assert triangles_intersect(t1, t2, shared_corners((0, 1, 2), (1, 0, 3)))


def test_touching_without_shared_index_is_forbidden():
    # same coordinates but different mesh vertices: contact is not topological
    t1 = (O, X, Y)
    t2 = (X, (2.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    assert triangles_intersect(t1, t2)
    assert not triangles_intersect(t1, t2, [(1, 0)])


def _pairs(draw_shared):
    """Triangle pairs on a small integer grid sharing 0, 1, 2 or 3 corners."""
    @st.composite
    def build(draw):
        k = draw_shared(draw)
        pts = draw(st.lists(pt, min_size=6 - k, max_size=6 - k, unique=True))
        f1 = (0, 1, 2)
        f2 = tuple([0, 1, 2][:k] + list(range(3, 6 - k)))
        f2 = tuple(draw(st.permutations(f2)))
        t1 = tuple(pts[v] for v in f1)
        t2 = tuple(pts[v] for v in f2)
        return t1, t2, f1, f2
    return build()


pairs = _pairs(lambda draw: draw(st.integers(0, 3)))


@settings(max_examples=1500, deadline=None)
@given(pairs)
def test_contact_matches_constructive_oracle(pair):
    t1, t2, f1, f2 = pair
    if is_degenerate(t1) or is_degenerate(t2):
        return
    got = triangles_intersect(t1, t2, shared_corners(f1, f2))
    assert got == oracles.forbidden_contact(t1, t2, f1, f2)
    assert got == triangles_intersect(t2, t1, shared_corners(f2, f1))


@settings(max_examples=100, deadline=None)
@given(st.lists(pairs, min_size=1, max_size=30))
def test_contact_many_matches_scalar(batch):
    batch = [b for b in batch if not is_degenerate(b[0]) and not is_degenerate(b[1])]
    if not batch:
        return
    ta = np.array([b[0] for b in batch])
    tb = np.array([b[1] for b in batch])
    ia = np.array([b[2] for b in batch])
    ib = np.array([b[3] for b in batch])
    got = triangles_intersect_many(ta, tb, ia, ib)
    want = [triangles_intersect(b[0], b[1], shared_corners(b[2], b[3])) for b in batch]
    assert got.tolist() == want
