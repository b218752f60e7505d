"""Executable checks for a contracted surface and its trace.

Every check is a pure function of its inputs. ``validate`` bundles them into a
:class:`ValidationReport` that serialises to flat ``name=value`` text or JSON.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidMeshError
from .geom import (
    _drop_axis,
    _point_in_tri_2d,
    _project,
    orientation,
    point_triangle_distance2_many,
    shared_corners,
    triangles_intersect,
    triangles_intersect_many,
)
from .mesh import PointCloud, SurfaceMesh

#: relative error allowed between a step's volume change and its tetrahedron
VOLUME_RTOL = 1e-9


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------

@dataclass
class ManifoldCheck:
    closed: bool
    orientation_consistent: bool
    boundary_edges: list[tuple[int, int]] = field(default_factory=list)
    nonmanifold_edges: list[tuple[int, int]] = field(default_factory=list)
    inconsistent_edges: list[tuple[int, int]] = field(default_factory=list)
    nonmanifold_vertices: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.closed and self.orientation_consistent and not self.nonmanifold_vertices

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        # ``ok, diagnostics = is_closed_manifold(mesh)``
        return iter((self.ok, self))


def is_closed_manifold(mesh: SurfaceMesh) -> ManifoldCheck:
    """Every edge borders exactly two facets traversing it in opposite
    directions, and every vertex's facet fan is one cycle."""
    directed: dict[tuple[int, int], int] = {}
    undirected: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for a, b, c in mesh.facets.values():
        for u, v in ((a, b), (b, c), (c, a)):
            directed[(u, v)] = directed.get((u, v), 0) + 1
            undirected.setdefault((min(u, v), max(u, v)), []).append((u, v))
    boundary, nonmanifold, inconsistent = [], [], []
    for e, uses in sorted(undirected.items()):
        if len(uses) == 1:
            boundary.append(e)
        elif len(uses) > 2:
            nonmanifold.append(e)
        elif uses[0] == uses[1]:
            inconsistent.append(e)

    # fan around each vertex: link edges (b, c) of facets (v, b, c) must chain
    # into a single cycle
    links: dict[int, list[tuple[int, int]]] = {}
    for a, b, c in mesh.facets.values():
        links.setdefault(a, []).append((b, c))
        links.setdefault(b, []).append((c, a))
        links.setdefault(c, []).append((a, b))
    bad_vertices = []
    for v, ring in sorted(links.items()):
        nxt: dict[int, list[int]] = {}
        for x, y in ring:
            nxt.setdefault(x, []).append(y)
        if any(len(ys) != 1 for ys in nxt.values()) or len(nxt) != len(ring):
            bad_vertices.append(v)
            continue
        start = ring[0][0]
        seen, cur = 0, start
        while True:
            ys = nxt.get(cur)
            if ys is None:
                break
            cur = ys[0]
            seen += 1
            if cur == start or seen > len(ring):
                break
        if cur != start or seen != len(ring):
            bad_vertices.append(v)
    return ManifoldCheck(
        closed=not boundary and not nonmanifold,
        orientation_consistent=not inconsistent and not nonmanifold,
        boundary_edges=boundary, nonmanifold_edges=nonmanifold,
        inconsistent_edges=inconsistent, nonmanifold_vertices=bad_vertices)


# ---------------------------------------------------------------------------
# self-intersection
# ---------------------------------------------------------------------------

@dataclass
class IntersectionCheck:
    ok: bool
    witnesses: list[tuple[int, int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        return iter((self.ok, self.witnesses))


def _box_pairs(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (i, j), i < j, whose closed boxes overlap (sweep along x)."""
    order = np.argsort(lo[:, 0], kind="stable")
    slo = lo[order, 0]
    ends = np.searchsorted(slo, hi[order, 0], side="right")
    counts = np.maximum(ends - np.arange(len(order)) - 1, 0)
    first = np.repeat(np.arange(len(order)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    second = first + 1 + offs
    i, j = order[first], order[second]
    keep = np.all(lo[i] <= hi[j], axis=1) & np.all(lo[j] <= hi[i], axis=1)
    i, j = i[keep], j[keep]
    return np.minimum(i, j), np.maximum(i, j)


def self_intersection_free(mesh: SurfaceMesh, exhaustive: bool = False) -> IntersectionCheck:
    """Scan all facet pairs for forbidden contact.

    Shared vertices/edges come from mesh indices. The default path prunes
    pairs with disjoint bounding boxes (exact, since boxes are built from the
    vertex coordinates themselves) and vectorises the plane-side rejection;
    ``exhaustive=True`` runs the scalar test on every pair. Both return the
    full list of offending facet-id pairs, sorted.
    """
    fids = list(mesh.facets)
    if exhaustive:
        bad = []
        for x in range(len(fids)):
            fx = mesh.facets[fids[x]]
            tx = mesh.triangle(fids[x])
            for y in range(x + 1, len(fids)):
                fy = mesh.facets[fids[y]]
                if triangles_intersect(tx, mesh.triangle(fids[y]), shared_corners(fx, fy)):
                    bad.append((fids[x], fids[y]))
        bad.sort()
        return IntersectionCheck(not bad, bad)
    if len(fids) < 2:
        return IntersectionCheck(True, [])
    ids = mesh.facet_array()
    tri = mesh.points[ids]
    i, j = _box_pairs(tri.min(axis=1), tri.max(axis=1))
    hit = triangles_intersect_many(tri[i], tri[j], ids[i], ids[j])
    fa = np.array(fids)
    bad = sorted(zip(fa[i[hit]].tolist(), fa[j[hit]].tolist()))
    return IntersectionCheck(not bad, bad)


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _cloud_ids(mesh: SurfaceMesh, cloud: PointCloud | None) -> tuple[np.ndarray, np.ndarray]:
    """Cloud ids expressed as rows of ``mesh.points`` plus their coordinates.

    A cloud that is the mesh's own coordinate array maps by index. Any other
    cloud is matched to mesh rows by exact coordinates; unmatched points get
    id -1.
    """
    if cloud is None or cloud.points is mesh.points or (
            cloud.points.shape == mesh.points.shape and np.array_equal(cloud.points, mesh.points)):
        return np.arange(len(mesh.points)), mesh.points
    lookup = {}
    for i, p in enumerate(mesh.coords):
        lookup.setdefault(p, i)
    ids = np.array([lookup.get(p, -1) for p in cloud.tuples], dtype=np.int64)
    return ids, cloud.points


def point_surface_distance2(mesh: SurfaceMesh, cloud: PointCloud | None = None) -> np.ndarray:
    """Squared distance of each cloud point to the nearest surface point.

    Points that are mesh vertices (by index) are exactly 0.
    """
    ids, pts = _cloud_ids(mesh, cloud)
    out = np.zeros(len(pts))
    is_vertex = np.array([i >= 0 and mesh.is_vertex(int(i)) for i in ids], dtype=bool)
    todo = np.flatnonzero(~is_vertex)
    if len(todo) == 0:
        return out
    if not mesh.facets:
        out[todo] = np.inf
        return out
    tri = mesh.points[mesh.facet_array()]
    a, b, c = tri[:, 0][None], tri[:, 1][None], tri[:, 2][None]
    chunk = max(1, 200_000 // len(tri))
    for s in range(0, len(todo), chunk):
        rows = todo[s:s + chunk]
        out[rows] = point_triangle_distance2_many(pts[rows, None, :], a, b, c).min(axis=1)
    return out


def surface_metric(mesh: SurfaceMesh, cloud: PointCloud | None = None) -> float:
    """Sum over cloud points of the squared distance to the surface."""
    return math.fsum(point_surface_distance2(mesh, cloud).tolist())


def directed_hausdorff(cloud: PointCloud | None, mesh: SurfaceMesh) -> float:
    """Largest distance from a cloud point to the surface."""
    d2 = point_surface_distance2(mesh, cloud)
    return math.sqrt(float(d2.max())) if len(d2) else 0.0


# ---------------------------------------------------------------------------
# containment
# ---------------------------------------------------------------------------

def _on_facet(p, t) -> bool:
    if orientation(t[0], t[1], t[2], p) != 0:
        return False
    proj = _project(_drop_axis(*t))
    return _point_in_tri_2d(proj(p), proj(t[0]), proj(t[1]), proj(t[2]))


def winding_numbers(mesh: SurfaceMesh, pts: np.ndarray) -> np.ndarray:
    """Generalised winding number of the surface around each point (solid angles)."""
    tri = mesh.points[mesh.facet_array()]
    out = np.zeros(len(pts))
    chunk = max(1, 200_000 // max(1, len(tri)))
    for s in range(0, len(pts), chunk):
        q = pts[s:s + chunk, None, None, :]
        v = tri[None] - q
        a, b, c = v[..., 0, :], v[..., 1, :], v[..., 2, :]
        la, lb, lc = (np.linalg.norm(x, axis=-1) for x in (a, b, c))
        num = np.einsum("...i,...i->...", a, np.cross(b, c))
        den = (la * lb * lc + np.einsum("...i,...i->...", a, b) * lc
               + np.einsum("...i,...i->...", b, c) * la + np.einsum("...i,...i->...", c, a) * lb)
        out[s:s + chunk] = (2.0 * np.arctan2(num, den)).sum(axis=1) / (4.0 * math.pi)
    return out


def _containment(mesh: SurfaceMesh, cloud: PointCloud | None) -> tuple[bool, list[int]]:
    ids, pts = _cloud_ids(mesh, cloud)
    outside = []
    todo = [k for k, i in enumerate(ids.tolist()) if not (i >= 0 and mesh.is_vertex(i))]
    if not todo:
        return True, []
    tri_ids = mesh.facet_array()
    tri = mesh.points[tri_ids]
    lo, hi = tri.min(axis=1), tri.max(axis=1)
    rest = []
    for k in todo:
        p = pts[k]
        near = np.flatnonzero(np.all(lo <= p, axis=1) & np.all(hi >= p, axis=1))
        q = tuple(p.tolist())
        if any(_on_facet(q, tuple(map(tuple, tri[j].tolist()))) for j in near):
            continue
        rest.append(k)
    if rest:
        w = winding_numbers(mesh, pts[rest])
        outside = [k for k, wk in zip(rest, w) if round(abs(wk)) == 0]
    return not outside, outside


def containment_check(cloud: PointCloud | None, mesh: SurfaceMesh, check_embedding: bool = True) -> bool:
    """True iff every cloud point is inside or on the closed surface.

    Raises :class:`InvalidMeshError` if the mesh is not a closed, consistently
    oriented manifold (and, with ``check_embedding``, if it self-intersects).
    """
    if not is_closed_manifold(mesh).ok:
        raise InvalidMeshError("containment needs a closed, consistently oriented manifold")
    if check_embedding and not self_intersection_free(mesh).ok:
        raise InvalidMeshError("containment needs a self-intersection-free surface")
    return _containment(mesh, cloud)[0]


# ---------------------------------------------------------------------------
# trace checks
# ---------------------------------------------------------------------------

def _field(step, name):
    if isinstance(step, dict):
        return step.get(name)
    return getattr(step, name, None)


def _action(step) -> str:
    a = _field(step, "action")
    return getattr(a, "value", a)


def check_trace(trace: Iterable) -> list[str]:
    """Replay assertions over a trace; returns failure messages (empty = pass).

    Accepts in-memory step records or rows read back from a trace CSV. Across
    INSERTED steps the metric must strictly decrease, the enclosed volume must
    drop and the area must not drop. When the records carry step deltas (the
    in-memory trace does) those are used, including the exact volume
    bookkeeping against the inserted tetrahedron and the Hausdorff check.
    """
    failures = []
    prev = None
    for step in trace:
        action = _action(step)
        if action in ("INITIAL",) or prev is None:
            if action in ("INITIAL", "INSERTED"):
                prev = step
            continue
        if action != "INSERTED":
            continue
        k = _field(step, "k")
        m0, m1 = float(_field(prev, "metric")), float(_field(step, "metric"))
        v0, v1 = float(_field(prev, "volume")), float(_field(step, "volume"))
        a0, a1 = float(_field(prev, "area")), float(_field(step, "area"))
        md = _field(step, "metric_delta")
        if md is not None:
            if not md < 0.0:
                failures.append(f"step {k}: metric delta {md!r} is not negative")
        if not m1 < m0:
            failures.append(f"step {k}: metric {m1!r} did not drop below {m0!r}")
        tet = _field(step, "tet_volume")
        vd = _field(step, "volume_delta")
        if tet is not None and vd is not None:
            if abs(-vd - tet) > VOLUME_RTOL * abs(tet):
                failures.append(f"step {k}: volume change {-vd!r} != tetrahedron volume {tet!r}")
            if tet < 0.0:
                failures.append(f"step {k}: negative tetrahedron volume {tet!r}")
        elif v1 > v0:
            failures.append(f"step {k}: volume grew from {v0!r} to {v1!r}")
        ad = _field(step, "area_delta")
        if ad is not None:
            if ad < 0.0:
                failures.append(f"step {k}: area delta {ad!r} is negative")
        elif a1 < a0:
            failures.append(f"step {k}: area shrank from {a0!r} to {a1!r}")
        h0, h1 = _field(prev, "hausdorff"), _field(step, "hausdorff")
        if h0 is not None and h1 is not None and float(h1) > float(h0):
            failures.append(f"step {k}: Hausdorff distance grew from {h0!r} to {h1!r}")
        prev = step
    return failures


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    closed_manifold: bool
    orientation_consistent: bool
    self_intersection_free: bool
    all_points_on_surface: bool
    containment_ok: bool
    metric: float
    hausdorff: float
    volume: float
    area: float
    n_points: int
    n_vertices: int
    n_facets: int
    intersection_witnesses: list[tuple[int, int]] = field(default_factory=list)
    manifold_diagnostics: dict = field(default_factory=dict)
    worst_offender: tuple[int, float] | None = None
    points_outside: list[int] = field(default_factory=list)
    trace_checked: bool = False
    trace_ok: bool = True
    trace_failures: list[str] = field(default_factory=list)

    FLAGS = ("closed_manifold", "orientation_consistent", "self_intersection_free",
             "all_points_on_surface", "containment_ok")

    @property
    def passed(self) -> bool:
        return all(getattr(self, f) for f in self.FLAGS) and self.trace_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_kv(self) -> str:
        """Flat ``name=value`` lines; lists are comma-joined."""
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            elif isinstance(value, dict):
                text = json.dumps(value, sort_keys=True)
            elif isinstance(value, (list, tuple)):
                text = ",".join(json.dumps(v) if not isinstance(v, str) else v for v in value)
            elif value is None:
                text = ""
            else:
                text = str(value)
            lines.append(f"{key}={text}")
        return "\n".join(lines) + "\n"


def validate(mesh: SurfaceMesh, cloud: PointCloud | None = None, trace=None,
             tolerance: float | None = None) -> ValidationReport:
    """Run every check and collect the outcome; never raises on failures.

    ``tolerance`` (absolute) decides when a non-vertex point counts as lying
    on the surface; default is 1e-9 of the cloud's bounding-box diagonal.
    """
    if cloud is None:
        cloud = PointCloud(mesh.points)
    if tolerance is None:
        tolerance = 1e-9 * cloud.bbox_diagonal
    man = is_closed_manifold(mesh)
    inter = self_intersection_free(mesh)
    d2 = point_surface_distance2(mesh, cloud)
    worst = None
    if len(d2):
        w = int(np.argmax(d2))
        worst = (w, math.sqrt(float(d2[w])))
    on_surface = bool(np.all(d2 <= tolerance * tolerance))
    outside: list[int] = []
    if man.ok and inter.ok:
        contained, outside = _containment(mesh, cloud)
    else:
        contained = False
    diag = {
        "boundary_edges": [list(e) for e in man.boundary_edges],
        "nonmanifold_edges": [list(e) for e in man.nonmanifold_edges],
        "inconsistent_edges": [list(e) for e in man.inconsistent_edges],
        "nonmanifold_vertices": man.nonmanifold_vertices,
    }
    report = ValidationReport(
        closed_manifold=man.closed and not man.nonmanifold_vertices,
        orientation_consistent=man.orientation_consistent,
        self_intersection_free=inter.ok,
        all_points_on_surface=on_surface,
        containment_ok=contained,
        metric=math.fsum(d2.tolist()),
        hausdorff=math.sqrt(float(d2.max())) if len(d2) else 0.0,
        volume=mesh.volume(),
        area=mesh.area(),
        n_points=len(cloud),
        n_vertices=mesh.n_vertices,
        n_facets=len(mesh.facets),
        intersection_witnesses=inter.witnesses,
        manifold_diagnostics={k: v for k, v in diag.items() if v},
        worst_offender=None if on_surface else worst,
        points_outside=outside,
    )
    if trace is not None:
        steps = getattr(trace, "steps", trace)
        failures = check_trace(steps)
        report.trace_checked = True
        report.trace_ok = not failures
        report.trace_failures = failures
    return report
