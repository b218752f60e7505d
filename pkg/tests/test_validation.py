import json
import math
from dataclasses import replace

import numpy as np
import pytest

from hullwrap import ContractionConfig, PointCloud, contract, convex_hull, generate_cloud
from hullwrap.errors import InvalidMeshError
from hullwrap.mesh import SurfaceMesh
from hullwrap.validation import (
    check_trace,
    containment_check,
    directed_hausdorff,
    is_closed_manifold,
    self_intersection_free,
    surface_metric,
    validate,
)

import oracles
from conftest import CUBE, TETRA


@pytest.fixture(scope="module")
def run50():
    cloud = generate_cloud("ball-uniform(50,7)")
    return cloud, contract(cloud, ContractionConfig(snapshots=True))


def tetra_mesh():
    return convex_hull(PointCloud(TETRA))


def interlocking_soup():
    """Two tetrahedra whose edges pass through each other's faces."""
    a = np.array([(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)], float)
    b = a * -1 + 0.6
    pts = np.vstack([a, b])
    fa = list(convex_hull(PointCloud(a)).facets.values())
    fb = [tuple(v + 4 for v in f) for f in convex_hull(PointCloud(b)).facets.values()]
    return SurfaceMesh(pts, fa + fb)


# -- topology ------------------------------------------------------------

def test_tetrahedron_is_closed():
    ok, diag = is_closed_manifold(tetra_mesh())
    assert ok and not diag.boundary_edges


def test_missing_facet_leaves_three_boundary_edges():
    mesh = tetra_mesh()
    mesh.remove_facet(next(iter(mesh.facets)))
    ok, diag = is_closed_manifold(mesh)
    assert not ok
    assert len(diag.boundary_edges) == 3


def test_flipped_facet_is_inconsistent():
    mesh = tetra_mesh()
    fid = next(iter(mesh.facets))
    a, b, c = mesh.remove_facet(fid)
    mesh.add_facet((a, c, b))
    check = is_closed_manifold(mesh)
    assert check.closed and not check.orientation_consistent
    assert len(check.inconsistent_edges) == 3


def test_pinched_vertex_detected():
    # two tetrahedra sharing only one vertex: every edge is fine, the fan is not
    a = TETRA
    b = -TETRA[1:]
    pts = np.vstack([a, b])
    fa = list(convex_hull(PointCloud(a)).facets.values())
    hb = convex_hull(PointCloud(np.vstack([a[:1], b])))
    remap = {0: 0, 1: 4, 2: 5, 3: 6}
    fb = [tuple(remap[v] for v in f) for f in hb.facets.values()]
    check = is_closed_manifold(SurfaceMesh(pts, fa + fb))
    assert check.closed and check.nonmanifold_vertices == [0]
    assert not check.ok


def test_post_split_meshes_stay_manifold_ball500(ball500):
    # check_invariants re-validates after every insertion and raises on failure
    result = contract(ball500, ContractionConfig(check_invariants=True))
    assert is_closed_manifold(result.mesh).ok


# -- intersections -------------------------------------------------------

@pytest.mark.parametrize("spec", ["ball-uniform(200,1)", "gaussian-blob(100,2)", "two-lobes(150,3)"])
def test_convex_hulls_are_embedded(spec):
    assert self_intersection_free(convex_hull(generate_cloud(spec)))


def test_interlocking_tetrahedra():
    mesh = interlocking_soup()
    ok, witnesses = self_intersection_free(mesh)
    assert not ok and witnesses
    assert witnesses == oracles.all_forbidden_pairs(mesh)
    assert witnesses == self_intersection_free(mesh, exhaustive=True).witnesses
    assert witnesses == sorted(witnesses)


def test_accelerated_matches_independent_oracle_on_snapshots(run50):
    _, result = run50
    for snap in result.trace.snapshots[::5]:
        assert self_intersection_free(snap).witnesses == oracles.all_forbidden_pairs(snap) == []


def test_perturbed_mesh_matches_oracle(run50):
    cloud, result = run50
    rng = np.random.default_rng(3)
    broken = 0
    for _ in range(5):
        pts = cloud.points.copy()
        idx = rng.choice(len(pts), size=3, replace=False)
        pts[idx] *= rng.uniform(0.2, 1.6, size=(3, 1))
        mesh = SurfaceMesh(pts, result.mesh.facets.values())
        witnesses = self_intersection_free(mesh).witnesses
        assert witnesses == oracles.all_forbidden_pairs(mesh)
        broken += bool(witnesses)
    assert broken  # at least one perturbation must actually break the surface


# -- distances -----------------------------------------------------------

def test_metric_zero_when_all_points_are_vertices(tetra):
    assert surface_metric(convex_hull(tetra), tetra) == 0.0
    assert directed_hausdorff(tetra, convex_hull(tetra)) == 0.0


def test_metric_of_one_interior_point():
    pts = np.vstack([CUBE, [(0.3, 0.6, 0.9)]])
    cloud = PointCloud(pts)
    hull = convex_hull(cloud)
    assert surface_metric(hull, cloud) == pytest.approx(0.01, rel=1e-12)


def test_hausdorff_cube_centre(cube_center):
    assert directed_hausdorff(cube_center, convex_hull(cube_center)) == pytest.approx(0.5, rel=1e-15)


def test_metric_mid_run_matches_brute_force(run50):
    cloud, result = run50
    for k in (0, len(result.trace.snapshots) // 2):
        snap = result.trace.snapshots[k]
        want = oracles.surface_metric_bf(snap, cloud.points)
        assert surface_metric(snap, cloud) == pytest.approx(want, rel=1e-9)
        assert result.trace.states[k].metric == pytest.approx(want, rel=1e-9)


def test_hausdorff_never_grows(run50):
    _, result = run50
    h = [s.hausdorff for s in result.trace.states]
    assert all(b <= a for a, b in zip(h, h[1:]))


# -- containment ---------------------------------------------------------

def test_hull_contains_its_cloud(ball500):
    assert containment_check(ball500, convex_hull(ball500))


def test_every_intermediate_surface_contains_cloud(run50):
    cloud, result = run50
    for snap in result.trace.snapshots:
        assert containment_check(cloud, snap)


def test_point_outside_tetrahedron():
    pts = np.vstack([TETRA, [(1.0, 1.0, 1.0)]])
    mesh = SurfaceMesh(pts, tetra_mesh().facets.values())
    assert not containment_check(PointCloud(pts), mesh)


def test_point_on_facet_counts_as_contained():
    pts = np.vstack([TETRA, [(0.25, 0.25, 0.0)]])
    mesh = SurfaceMesh(pts, tetra_mesh().facets.values())
    assert containment_check(PointCloud(pts), mesh)


def test_containment_needs_closed_mesh(tetra):
    mesh = tetra_mesh()
    mesh.remove_facet(next(iter(mesh.facets)))
    with pytest.raises(InvalidMeshError):
        containment_check(tetra, mesh)


# -- report --------------------------------------------------------------

def test_completed_run_passes(run50):
    cloud, result = run50
    report = validate(result.mesh, cloud, result.trace)
    assert report.passed
    assert all(getattr(report, f) for f in report.FLAGS)
    assert report.metric == 0.0 and report.hausdorff == 0.0
    assert not report.intersection_witnesses and report.worst_offender is None


def test_broken_mesh_reports_witnesses(tetra):
    report = validate(interlocking_soup())
    assert not report.self_intersection_free and report.intersection_witnesses
    mesh = tetra_mesh()
    mesh.remove_facet(next(iter(mesh.facets)))
    report = validate(mesh, tetra)
    assert not report.closed_manifold and not report.containment_ok
    assert len(report.manifold_diagnostics["boundary_edges"]) == 3


def test_mismatched_cloud(tetra, cube_center):
    report = validate(convex_hull(tetra), cube_center)
    assert not report.all_points_on_surface
    assert report.worst_offender is not None


def test_forged_trace_fails(run50):
    cloud, result = run50
    steps = list(result.trace.steps)
    k = next(i for i, s in enumerate(steps) if s.action.value == "INSERTED")
    steps[k] = replace(steps[k], metric=steps[k - 1].metric + 1.0, metric_delta=1.0)
    failures = check_trace(steps)
    assert failures and "metric" in failures[0]
    assert not validate(result.mesh, cloud, steps).passed


def test_trace_rows_from_csv_are_checked():
    rows = [
        {"k": 0, "point_id": -1, "action": "INITIAL", "metric": 2.0, "volume": 3.0, "area": 1.0},
        {"k": 1, "point_id": 5, "action": "INSERTED", "metric": 1.0, "volume": 2.5, "area": 1.2},
        {"k": 1, "point_id": 6, "action": "DEFERRED", "metric": 1.0, "volume": 2.5, "area": 1.2},
        {"k": 2, "point_id": 6, "action": "INSERTED", "metric": 1.0, "volume": 2.6, "area": 1.1},
    ]
    failures = check_trace(rows)
    assert len(failures) == 3


def test_volume_bookkeeping_matches_tetrahedra(run50):
    _, result = run50
    for s in result.trace.inserted:
        assert abs(-s.volume_delta - s.tet_volume) <= 1e-9 * s.tet_volume
        assert s.area_delta >= 0.0


def test_report_serialises(run50):
    cloud, result = run50
    report = validate(result.mesh, cloud)
    d = json.loads(report.to_json())
    assert d["passed"] is True and d["closed_manifold"] is True
    kv = dict(line.split("=", 1) for line in report.to_kv().splitlines())
    assert kv["closed_manifold"] == "true"
    assert float(kv["volume"]) == report.volume
