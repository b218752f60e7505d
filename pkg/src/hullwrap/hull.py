"""Initial surface: exact-predicate incremental convex hull.

The hull is grown point by point (farthest conflict point first). A facet
counts as visible from the new apex when the apex is on or above its plane,
which never produces a degenerate cone facet. Afterwards coplanar facet
regions are merged and re-fanned from their lowest-index corner so that the
triangulation of flat faces is deterministic and carries no non-extreme
vertices.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .errors import DimensionalDeficiencyError, InconsistentInputError
from .geom import orient2d, orientation, orientation_many, _drop_axis, _project
from .mesh import PointCloud, SurfaceMesh, _canonical


def _collinear(a, b, c) -> bool:
    return (orient2d((a[0], a[1]), (b[0], b[1]), (c[0], c[1])) == 0
            and orient2d((a[1], a[2]), (b[1], b[2]), (c[1], c[2])) == 0
            and orient2d((a[2], a[0]), (b[2], b[0]), (c[2], c[0])) == 0)


def _initial_simplex(pts: np.ndarray, coords) -> tuple[int, int, int, int]:
    n = len(pts)
    order = np.lexsort((np.arange(n), pts[:, 2], pts[:, 1], pts[:, 0]))
    i0 = int(order[0])
    d0 = np.einsum("ij,ij->i", pts - pts[i0], pts - pts[i0])
    i1 = int(np.argmax(d0))
    if d0[i1] == 0.0:
        raise DimensionalDeficiencyError("all points coincide")
    u = pts[i1] - pts[i0]
    line = np.cross(pts - pts[i0], u)
    d1 = np.einsum("ij,ij->i", line, line)
    i2 = None
    for k in np.argsort(-d1, kind="stable"):
        if d1[k] == 0.0:
            break
        if not _collinear(coords[i0], coords[i1], coords[int(k)]):
            i2 = int(k)
            break
    if i2 is None:
        raise DimensionalDeficiencyError("all points are collinear; a 3D hull needs volume")
    normal = np.cross(pts[i1] - pts[i0], pts[i2] - pts[i0])
    d2 = np.abs((pts - pts[i0]) @ normal)
    signs = orientation_many(pts[i0], pts[i1], pts[i2], pts)
    i3 = None
    for k in np.argsort(-d2, kind="stable"):
        if signs[k] != 0:
            i3 = int(k)
            break
    if i3 is None:
        raise DimensionalDeficiencyError("all points are coplanar; a 3D hull needs volume")
    return i0, i1, i2, i3


class _Builder:
    def __init__(self, cloud: PointCloud):
        self.pts = cloud.points
        self.coords = cloud.tuples
        self.facets: dict[int, tuple[int, int, int]] = {}
        self.owner: dict[tuple[int, int], int] = {}  # directed edge -> facet
        self.conflict: dict[int, np.ndarray] = {}
        self.next_id = 0

    def add(self, f) -> int:
        fid = self.next_id
        self.next_id += 1
        self.facets[fid] = f
        a, b, c = f
        for e in ((a, b), (b, c), (c, a)):
            self.owner[e] = fid
        return fid

    def remove(self, fid: int):
        a, b, c = self.facets.pop(fid)
        for e in ((a, b), (b, c), (c, a)):
            if self.owner.get(e) == fid:
                del self.owner[e]
        self.conflict.pop(fid, None)

    def assign(self, candidates: np.ndarray, fids: list[int]) -> None:
        remaining = candidates
        for fid in fids:
            if len(remaining) == 0:
                break
            a, b, c = (self.pts[v] for v in self.facets[fid])
            s = orientation_many(a, b, c, self.pts[remaining])
            above = s > 0
            if above.any():
                self.conflict[fid] = remaining[above]
                remaining = remaining[~above]

    def visible(self, fid: int, p: int) -> bool:
        a, b, c = self.facets[fid]
        co = self.coords
        return orientation(co[a], co[b], co[c], co[p]) >= 0

    def run(self) -> None:
        co = self.coords
        i0, i1, i2, i3 = _initial_simplex(self.pts, co)
        if orientation(co[i0], co[i1], co[i2], co[i3]) > 0:
            i1, i2 = i2, i1
        first = [self.add(f) for f in ((i0, i1, i2), (i0, i3, i1), (i1, i3, i2), (i2, i3, i0))]
        rest = np.setdiff1d(np.arange(len(self.pts)), [i0, i1, i2, i3])
        self.assign(rest, first)
        while self.conflict:
            fid = min(self.conflict)
            cand = self.conflict[fid]
            a, b, c = (self.pts[v] for v in self.facets[fid])
            normal = np.cross(b - a, c - a)
            height = (self.pts[cand] - a) @ normal
            p = int(cand[np.flatnonzero(height == height.max())].min())
            self._add_point(fid, p)

    def _add_point(self, start: int, p: int) -> None:
        seen = {start}
        visible = []
        queue = deque([start])
        while queue:
            fid = queue.popleft()
            visible.append(fid)
            a, b, c = self.facets[fid]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.owner[(v, u)]
                if nb not in seen:
                    seen.add(nb)
                    if self.visible(nb, p):
                        queue.append(nb)
        vis = set(visible)
        horizon = []
        for fid in visible:
            a, b, c = self.facets[fid]
            for u, v in ((a, b), (b, c), (c, a)):
                if self.owner[(v, u)] not in vis:
                    horizon.append((u, v))
        orphans = [self.conflict[f] for f in visible if f in self.conflict]
        for fid in visible:
            self.remove(fid)
        new = [self.add((u, v, p)) for u, v in horizon]
        if orphans:
            pool = np.concatenate(orphans)
            pool = pool[pool != p]
            self.assign(pool, new)


def _merge_coplanar(facets: list[tuple[int, int, int]], coords) -> list[tuple[int, int, int]]:
    """Re-triangulate flat faces by fanning from the lowest-index strict corner."""
    owner = {}
    for i, (a, b, c) in enumerate(facets):
        for e in ((a, b), (b, c), (c, a)):
            owner[e] = i
    parent = list(range(len(facets)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    any_flat = False
    for i, (a, b, c) in enumerate(facets):
        for u, v in ((a, b), (b, c), (c, a)):
            j = owner[(v, u)]
            if j > i:
                x = next(w for w in facets[j] if w != u and w != v)
                if orientation(coords[a], coords[b], coords[c], coords[x]) == 0:
                    parent[find(j)] = find(i)
                    any_flat = True
    if not any_flat:
        return facets

    regions: dict[int, list[int]] = {}
    for i in range(len(facets)):
        regions.setdefault(find(i), []).append(i)

    loops: dict[int, list[int]] = {}
    for root, members in regions.items():
        inside = set(members)
        nxt = {}
        for i in members:
            a, b, c = facets[i]
            for u, v in ((a, b), (b, c), (c, a)):
                if find(owner[(v, u)]) != root or owner[(v, u)] not in inside:
                    nxt[u] = v
        start = min(nxt)
        loop = [start]
        while nxt[loop[-1]] != start:
            loop.append(nxt[loop[-1]])
        loops[root] = loop

    corner = {}
    for root, loop in loops.items():
        t = facets[regions[root][0]]
        proj = _project(_drop_axis(*(coords[v] for v in t)))
        m = len(loop)
        for k, v in enumerate(loop):
            turn = orient2d(proj(coords[loop[k - 1]]), proj(coords[v]), proj(coords[loop[(k + 1) % m]]))
            corner[v] = corner.get(v, False) or turn != 0

    out = []
    for root, loop in loops.items():
        poly = [v for v in loop if corner[v]]
        if len(regions[root]) == 1 and len(poly) == 3 and len(loop) == 3:
            out.append(facets[regions[root][0]])
            continue
        k = poly.index(min(poly))
        poly = poly[k:] + poly[:k]
        for j in range(1, len(poly) - 1):
            out.append((poly[0], poly[j], poly[j + 1]))
    return out


def convex_hull(cloud: PointCloud) -> SurfaceMesh:
    """Closed, outward-oriented triangulation of the convex hull of ``cloud``.

    Raises :class:`DimensionalDeficiencyError` for fewer than four points or a
    flat/linear cloud.
    """
    if len(cloud) < 4:
        raise DimensionalDeficiencyError(f"need at least 4 points for a 3D hull, got {len(cloud)}")
    builder = _Builder(cloud)
    builder.run()
    facets = _merge_coplanar(list(builder.facets.values()), cloud.tuples)
    facets = sorted(_canonical(f) for f in facets)
    return SurfaceMesh(cloud.points, facets)


def classify_points(cloud: PointCloud, hull: SurfaceMesh) -> tuple[list[int], list[int]]:
    """Split cloud ids into (hull vertices, everything else) by index identity."""
    if hull.points.shape != cloud.points.shape or not (
            hull.points is cloud.points or np.array_equal(hull.points, cloud.points)):
        raise InconsistentInputError("hull was not built from this cloud")
    on = hull.vertex_ids
    on_set = set(on)
    return on, [i for i in range(len(cloud)) if i not in on_set]
