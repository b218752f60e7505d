"""Hull-to-concave-surface contraction by guarded facet splits.

Starting from the convex hull, each interior point is pulled onto the surface
by replacing a facet ``(A, B, C)`` with the three facets ``(A, B, P)``,
``(B, C, P)`` and ``(C, A, P)``, a tetrahedral dent reaching ``P``. Points
are visited in passes, nearest first. Within a pass, a point whose nearest
facet has already been replaced is skipped until the next pass. A dent is
only made when it keeps the surface embedded and keeps every other point
inside; when no candidate facet allows that, the point waits for the next
pass, and a pass without any insertion ends the run as STALLED.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DegenerateFacetError, DimensionalDeficiencyError, DuplicateVertexError
from .geom import (
    is_degenerate,
    orientation,
    orientation_many,
    point_triangle_distance2_many,
    shared_corners,
    signed_tet_volume,
    triangle_area,
    triangles_intersect_many,
)
from .hull import classify_points, convex_hull
from .mesh import PointCloud, SurfaceMesh


class Priority(str, enum.Enum):
    CENTROID = "centroid"
    TRUE_DISTANCE = "true"


class Action(str, enum.Enum):
    INITIAL = "INITIAL"
    INSERTED = "INSERTED"
    DEFERRED = "DEFERRED"
    SKIPPED_SHARED_FACET = "SKIPPED_SHARED_FACET"


class Status(str, enum.Enum):
    ON_SURFACE = "ON_SURFACE"
    PENDING = "PENDING"
    DEFERRED = "DEFERRED"


class Outcome(str, enum.Enum):
    COMPLETE = "COMPLETE"
    STALLED = "STALLED"


@dataclass(frozen=True)
class ContractionConfig:
    """Run parameters.

    ``on_surface_tol`` is relative to the cloud's bounding-box diagonal; a
    point closer than that to a facet is absorbed by a flat split.
    ``check_invariants`` re-validates the mesh after every insertion (slow,
    meant for tests).
    """

    priority: Priority = Priority.CENTROID
    fallback_breadth: int = 8
    on_surface_tol: float = 1e-9
    max_passes: int = 10_000
    snapshots: bool = False
    check_invariants: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "priority", Priority(self.priority))
        except ValueError:
            raise ConfigError(f"unknown priority mode {self.priority!r}") from None
        if int(self.fallback_breadth) < 1:
            raise ConfigError("fallback breadth must be >= 1")
        if not self.on_surface_tol > 0:
            raise ConfigError("on-surface tolerance must be > 0")
        if int(self.max_passes) < 1:
            raise ConfigError("max passes must be >= 1")


@dataclass(frozen=True)
class QueueEntry:
    point_id: int
    facet_id: int
    facet: tuple[int, int, int]
    distance: float
    candidates: tuple[int, ...]


@dataclass(frozen=True)
class GuardDecision:
    """Outcome of :func:`guard_insertion`.

    ``witness`` is ``(candidate facet, offender)`` when illegal; the offender
    is a facet triple for an intersection, or ``("point", id)`` /
    ``("plane", None)`` / ``("degenerate", None)`` for the other refusals.
    """

    legal: bool
    witness: tuple | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.legal


@dataclass(frozen=True)
class StepRecord:
    k: int
    point_id: int
    action: Action
    facet: tuple[int, int, int] | None
    metric: float
    volume: float
    area: float
    hausdorff: float
    metric_delta: float = 0.0
    volume_delta: float = 0.0
    area_delta: float = 0.0
    tet_volume: float = 0.0
    pass_index: int = 0


@dataclass
class ContractionTrace:
    steps: list[StepRecord] = field(default_factory=list)
    snapshots: list[SurfaceMesh] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def inserted(self) -> list[StepRecord]:
        return [s for s in self.steps if s.action is Action.INSERTED]

    @property
    def states(self) -> list[StepRecord]:
        """Initial record followed by one record per insertion."""
        return [s for s in self.steps if s.action in (Action.INITIAL, Action.INSERTED)]


@dataclass
class ContractionResult:
    mesh: SurfaceMesh
    trace: ContractionTrace
    outcome: Outcome
    hull_vertices: int
    insertions: int
    passes: int
    blocked: dict[int, GuardDecision] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def __iter__(self):
        # allows ``mesh, trace, outcome = contract(...)``
        return iter((self.mesh, self.trace, self.outcome))


# ---------------------------------------------------------------------------
# facet index: coordinates and bounding boxes addressable by facet id
# ---------------------------------------------------------------------------

class FacetIndex:
    """Per-facet vertex coordinates and AABBs, kept in sync with a mesh.

    Rows are addressed directly by facet id; removed facets are masked out.
    Box queries are a single vectorised scan over the live rows.
    """

    def __init__(self, mesh: SurfaceMesh):
        self.mesh = mesh
        cap = max(16, 2 * mesh._next_id)
        self.corners = np.zeros((cap, 3, 3))
        self.lo = np.full((cap, 3), np.inf)
        self.hi = np.full((cap, 3), -np.inf)
        self.alive = np.zeros(cap, dtype=bool)
        for fid in mesh.facets:
            self.add(fid)

    def _grow(self, need: int) -> None:
        cap = len(self.alive)
        if need < cap:
            return
        new = max(need + 1, 2 * cap)
        self.corners = np.concatenate([self.corners, np.zeros((new - cap, 3, 3))])
        self.lo = np.concatenate([self.lo, np.full((new - cap, 3), np.inf)])
        self.hi = np.concatenate([self.hi, np.full((new - cap, 3), -np.inf)])
        self.alive = np.concatenate([self.alive, np.zeros(new - cap, dtype=bool)])

    def add(self, fid: int) -> None:
        self._grow(fid)
        tri = self.mesh.points[list(self.mesh.facets[fid])]
        self.corners[fid] = tri
        self.lo[fid] = tri.min(axis=0)
        self.hi[fid] = tri.max(axis=0)
        self.alive[fid] = True

    def remove(self, fid: int) -> None:
        self.alive[fid] = False
        self.lo[fid] = np.inf
        self.hi[fid] = -np.inf

    def overlapping(self, lo, hi) -> np.ndarray:
        """Ids of live facets whose closed box touches the closed box [lo, hi]."""
        hit = np.all(self.lo <= hi, axis=1) & np.all(self.hi >= lo, axis=1)
        return np.flatnonzero(hit)

    def live_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive)


# ---------------------------------------------------------------------------
# priorities
# ---------------------------------------------------------------------------

def _rank_rows(dist: np.ndarray, fids: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per row, the k smallest distances ordered by (distance, facet id)."""
    n, m = dist.shape
    k = min(k, m)
    if k < m:
        part = np.argpartition(dist, k - 1, axis=1)[:, :k]
        kth = np.take_along_axis(dist, part, axis=1).max(axis=1)
        # ties straddling the cut: fall back to a full ordering for those rows
        ties = (dist == kth[:, None]).sum(axis=1) > (np.take_along_axis(dist, part, axis=1) == kth[:, None]).sum(axis=1)
    else:
        part = np.broadcast_to(np.arange(m), (n, m)).copy()
        ties = np.zeros(n, dtype=bool)
    out_f = np.empty((n, k), dtype=np.int64)
    out_d = np.empty((n, k))
    for i in range(n):
        cols = np.arange(m) if ties[i] else part[i]
        order = np.lexsort((fids[cols], dist[i, cols]))[:k]
        out_f[i] = fids[cols[order]]
        out_d[i] = dist[i, cols[order]]
    return out_d, out_f


def compute_priorities(interior_ids: Iterable[int], surface: SurfaceMesh, cloud: PointCloud | None = None,
                       mode: Priority | str = Priority.CENTROID, breadth: int = 1) -> list[QueueEntry]:
    """Queue of interior points sorted by distance to their nearest facet.

    ``mode="centroid"`` measures to facet centroids; ``mode="true"`` uses the
    exact point-to-triangle distance. Each entry carries up to ``breadth``
    candidate facets, nearest first (ties broken by facet id). The queue is
    ordered by (distance, point id).
    """
    mode = Priority(mode)
    ids = np.array(sorted(set(int(i) for i in interior_ids)), dtype=np.int64)
    if len(ids) == 0 or not surface.facets:
        return []
    pts = (cloud.points if cloud is not None else surface.points)[ids]
    fids = np.fromiter(surface.facets.keys(), dtype=np.int64, count=len(surface.facets))
    tri = surface.points[np.array(list(surface.facets.values()))]
    k = min(breadth, len(fids))

    if mode is Priority.CENTROID:
        cent = tri.mean(axis=1)
        if len(fids) <= 64:
            dist = np.linalg.norm(pts[:, None, :] - cent[None, :, :], axis=2)
            best_d, best_f = _rank_rows(dist, fids, k)
        else:
            tree = cKDTree(cent)
            kq = min(k + 1, len(fids))
            d, j = tree.query(pts, k=kq)
            d = d.reshape(len(pts), kq)
            j = j.reshape(len(pts), kq)
            best_d = np.empty((len(pts), k))
            best_f = np.empty((len(pts), k), dtype=np.int64)
            for i in range(len(pts)):
                # exact distances; a tie at the cut means KD order is not enough
                di = np.linalg.norm(cent[j[i]] - pts[i], axis=1)
                if kq > k and di.max() == np.sort(di)[k - 1]:
                    di_all = np.linalg.norm(cent - pts[i], axis=1)
                    dd, ff = _rank_rows(di_all[None, :], fids, k)
                else:
                    dd, ff = _rank_rows(di[None, :], fids[j[i]], k)
                best_d[i] = dd[0]
                best_f[i] = ff[0]
    else:
        best_d = np.empty((len(pts), k))
        best_f = np.empty((len(pts), k), dtype=np.int64)
        a, b, c = tri[:, 0][None], tri[:, 1][None], tri[:, 2][None]
        chunk = max(1, 200_000 // max(1, len(fids)))
        for s in range(0, len(pts), chunk):
            d2 = point_triangle_distance2_many(pts[s:s + chunk, None, :], a, b, c)
            dd, ff = _rank_rows(np.sqrt(d2), fids, k)
            best_d[s:s + chunk] = dd
            best_f[s:s + chunk] = ff

    order = np.lexsort((ids, best_d[:, 0]))
    return [QueueEntry(int(ids[i]), int(best_f[i, 0]), surface.facets[int(best_f[i, 0])],
                       float(best_d[i, 0]), tuple(int(f) for f in best_f[i]))
            for i in order]


# ---------------------------------------------------------------------------
# guard and split
# ---------------------------------------------------------------------------

def _split_triples(f, p):
    a, b, c = f
    return ((a, b, p), (b, c, p), (c, a, p))


def _guard(mesh: SurfaceMesh, index: FacetIndex, fid: int, p: int, others: np.ndarray | None) -> GuardDecision:
    f = mesh.facets[fid]
    co = mesh.coords
    a, b, c = f
    if mesh.is_vertex(p) or p in f:
        return GuardDecision(False, (f, ("vertex", p)), "point is already a surface vertex")
    side = orientation(co[a], co[b], co[c], co[p])
    if side > 0:
        return GuardDecision(False, (f, ("plane", None)), "point lies outside the facet plane")
    new = _split_triples(f, p)
    for t in new:
        if is_degenerate((co[t[0]], co[t[1]], co[t[2]])):
            return GuardDecision(False, (t, ("degenerate", None)), "split facet would be degenerate")

    tet = mesh.points[[a, b, c, p]]
    lo, hi = tet.min(axis=0), tet.max(axis=0)

    if side < 0:
        pts = mesh.points
        cand = others if others is not None else np.arange(len(pts))
        box = np.all((pts[cand] >= lo) & (pts[cand] <= hi), axis=1)
        cand = cand[box]
        cand = cand[(cand != a) & (cand != b) & (cand != c) & (cand != p)]
        if len(cand):
            q = pts[cand]
            A, B, C, P = tet
            inside = ((orientation_many(A, B, C, q) <= 0) & (orientation_many(A, B, P, q) >= 0)
                      & (orientation_many(B, C, P, q) >= 0) & (orientation_many(C, A, P, q) >= 0))
            if inside.any():
                return GuardDecision(False, (f, ("point", int(cand[np.argmax(inside)]))),
                                     "dent would expel a cloud point")

    near = index.overlapping(lo, hi)
    near = near[near != fid]
    if len(near) == 0:
        return GuardDecision(True)
    near_ids = np.array([mesh.facets[g] for g in near.tolist()], dtype=np.int64)
    near_tri = index.corners[near]
    new_ids = np.array(new, dtype=np.int64)
    new_tri = mesh.points[new_ids]
    # pair every new facet with every retained facet whose box it touches
    hit = (np.all(index.lo[near][None] <= new_tri.max(axis=1)[:, None], axis=2)
           & np.all(index.hi[near][None] >= new_tri.min(axis=1)[:, None], axis=2))
    ti, gi = np.nonzero(hit)
    if len(ti) == 0:
        return GuardDecision(True)
    bad = triangles_intersect_many(new_tri[ti], near_tri[gi], new_ids[ti], near_ids[gi])
    if bad.any():
        j = int(np.argmax(bad))
        return GuardDecision(False, (new[ti[j]], tuple(near_ids[gi[j]].tolist())),
                             "split facet would cross the surface")
    return GuardDecision(True)


def _resolve_facet(surface: SurfaceMesh, facet) -> int:
    if isinstance(facet, (int, np.integer)):
        if int(facet) not in surface.facets:
            raise KeyError(f"no facet with id {facet}")
        return int(facet)
    fid = surface.find_facet(facet)
    if fid is None:
        raise KeyError(f"facet {tuple(facet)} is not on the surface")
    return fid


def guard_insertion(surface: SurfaceMesh, facet, p: int) -> GuardDecision:
    """Would splitting ``facet`` at point ``p`` keep the surface valid?

    Legal iff ``p`` is not on the outward side of the facet plane, none of the
    three new facets is degenerate, the removed tetrahedron holds no other
    point of the coordinate array, and no new facet makes forbidden contact
    with a retained facet (contact along mesh-shared vertices/edges is fine).
    """
    fid = _resolve_facet(surface, facet)
    return _guard(surface, FacetIndex(surface), fid, int(p), None)


def split_facet(surface: SurfaceMesh, facet, p: int) -> SurfaceMesh:
    """Replace facet ``(A, B, C)`` by ``(A, B, P)``, ``(B, C, P)``, ``(C, A, P)`` in place.

    Edge directions AB, BC, CA are preserved, so a consistently oriented
    closed mesh stays one. Returns the same mesh.
    """
    _split(surface, _resolve_facet(surface, facet), int(p))
    return surface


def _split(surface: SurfaceMesh, fid: int, p: int) -> tuple[int, int, int]:
    f = surface.facets[fid]
    co = surface.coords
    if surface.is_vertex(p) or p in f or any(co[p] == co[v] for v in f):
        raise DuplicateVertexError(f"point {p} is already a vertex of the surface")
    new = _split_triples(f, p)
    for t in new:
        if is_degenerate((co[t[0]], co[t[1]], co[t[2]])):
            raise DegenerateFacetError(f"splitting {f} at {p} creates degenerate facet {t}")
    surface.remove_facet(fid)
    return tuple(surface.add_facet(t) for t in new)


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------

class Contraction:
    """Mutable contraction state: surface, per-point status and bookkeeping."""

    def __init__(self, cloud: PointCloud, config: ContractionConfig | None = None):
        self.cloud = cloud
        self.config = config or ContractionConfig()
        self.timings = {"hull": 0.0, "prioritize": 0.0, "insert_guard": 0.0}
        t0 = time.perf_counter()
        self.mesh = convex_hull(cloud)
        self.timings["hull"] = time.perf_counter() - t0
        on, interior = classify_points(cloud, self.mesh)
        self.hull_vertices = len(on)
        self.status = {i: Status.PENDING for i in interior}
        self.status.update({i: Status.ON_SURFACE for i in on})
        self.k = 0
        self.passes = 0
        self.tol = self.config.on_surface_tol * cloud.bbox_diagonal
        self.index = FacetIndex(self.mesh)
        self.trace = ContractionTrace()
        self.blocked: dict[int, GuardDecision] = {}

        n = len(cloud)
        self.pending_mask = np.zeros(n, dtype=bool)
        self.pending_mask[interior] = True
        self.dist2 = np.zeros(n)
        self.nearest = np.full(n, -1, dtype=np.int64)
        pend = np.array(interior, dtype=np.int64)
        if len(pend):
            d2, arg = self._nearest_over_live(pend)
            self.dist2[pend] = d2
            self.nearest[pend] = arg
        o = self.mesh.reference_point
        self.vol_term = {fid: signed_tet_volume(o, self.mesh.triangle(fid)) for fid in self.mesh.facets}
        self.area_term = {fid: triangle_area(self.mesh.triangle(fid)) for fid in self.mesh.facets}
        self._refresh()
        self._record(Action.INITIAL, -1, None)
        if self.config.snapshots:
            self.trace.snapshots.append(self.mesh.copy())

    # -- bookkeeping --------------------------------------------------------
    def _nearest_over_live(self, ids: np.ndarray):
        live = self.index.live_ids()
        corners = self.index.corners[live]
        a, b, c = corners[:, 0][None], corners[:, 1][None], corners[:, 2][None]
        best = np.empty(len(ids))
        arg = np.empty(len(ids), dtype=np.int64)
        chunk = max(1, 200_000 // max(1, len(live)))
        for s in range(0, len(ids), chunk):
            d2 = point_triangle_distance2_many(self.cloud.points[ids[s:s + chunk], None, :], a, b, c)
            j = np.argmin(d2, axis=1)
            best[s:s + chunk] = d2[np.arange(len(j)), j]
            arg[s:s + chunk] = live[j]
        return best, arg

    @property
    def pending(self) -> list[int]:
        return np.flatnonzero(self.pending_mask).tolist()

    @property
    def volume(self) -> float:
        return math.fsum(self.vol_term.values())

    @property
    def area(self) -> float:
        return math.fsum(self.area_term.values())

    @property
    def metric(self) -> float:
        return math.fsum(self.dist2.tolist())

    def _refresh(self) -> None:
        self._state = (self.metric, self.volume, self.area,
                       math.sqrt(float(self.dist2.max())) if len(self.dist2) else 0.0)

    def _record(self, action: Action, p: int, facet, **extra) -> None:
        metric, volume, area, hausdorff = self._state
        self.trace.steps.append(StepRecord(
            k=self.k, point_id=p, action=action, facet=facet, metric=metric, volume=volume,
            area=area, hausdorff=hausdorff, pass_index=self.passes, **extra))

    # -- one insertion ------------------------------------------------------
    def _insert(self, fid: int, p: int) -> None:
        f = self.mesh.facets[fid]
        tri = self.mesh.triangle(fid)
        old_metric_terms = {}
        new_ids = _split(self.mesh, fid, p)
        self.index.remove(fid)
        for g in new_ids:
            self.index.add(g)

        o = self.mesh.reference_point
        old_v = self.vol_term.pop(fid)
        old_a = self.area_term.pop(fid)
        new_v = []
        new_a = []
        for g in new_ids:
            t = self.mesh.triangle(g)
            self.vol_term[g] = signed_tet_volume(o, t)
            self.area_term[g] = triangle_area(t)
            new_v.append(self.vol_term[g])
            new_a.append(self.area_term[g])
        volume_delta = math.fsum(new_v + [-old_v])
        area_delta = math.fsum(new_a + [-old_a])
        tet_volume = signed_tet_volume(self.mesh.coords[p], tri)

        self.status[p] = Status.ON_SURFACE
        self.pending_mask[p] = False
        old_metric_terms[p] = self.dist2[p]
        self.dist2[p] = 0.0
        self.nearest[p] = -1
        pend = np.flatnonzero(self.pending_mask)
        if len(pend):
            corners = self.index.corners[list(new_ids)]
            d2 = point_triangle_distance2_many(self.cloud.points[pend, None, :], corners[None, :, 0],
                                               corners[None, :, 1], corners[None, :, 2])
            j = np.argmin(d2, axis=1)
            dn = d2[np.arange(len(pend)), j]
            gid = np.array(new_ids)[j]
            lost = self.nearest[pend] == fid
            upd_d = self.dist2[pend].copy()
            upd_n = self.nearest[pend].copy()
            better = dn < upd_d
            upd_d[better] = dn[better]
            upd_n[better] = gid[better]
            if lost.any():
                rd, rn = self._nearest_over_live(pend[lost])
                upd_d[lost] = rd
                upd_n[lost] = rn
            changed = upd_d != self.dist2[pend]
            for i in pend[changed].tolist():
                old_metric_terms[i] = self.dist2[i]
            self.dist2[pend] = upd_d
            self.nearest[pend] = upd_n
        metric_delta = math.fsum([self.dist2[i] - v for i, v in old_metric_terms.items()])

        self.k += 1
        self._refresh()
        self._record(Action.INSERTED, p, f, metric_delta=metric_delta, volume_delta=volume_delta,
                     area_delta=area_delta, tet_volume=tet_volume)
        if self.config.snapshots:
            self.trace.snapshots.append(self.mesh.copy())
        if self.config.check_invariants:
            from .validation import is_closed_manifold

            ok, diag = is_closed_manifold(self.mesh)
            if not ok:
                raise AssertionError(f"mesh broke after inserting {p}: {diag}")

    def _facing(self, p: int) -> list[int]:
        """Live facets with ``p`` on or inside their plane, nearest first."""
        live = self.index.live_ids()
        cor = self.index.corners[live]
        q = self.cloud.points[p]
        side = orientation_many(cor[:, 0], cor[:, 1], cor[:, 2], q)
        live, cor = live[side <= 0], cor[side <= 0]
        if self.config.priority is Priority.CENTROID:
            d = np.linalg.norm(cor.mean(axis=1) - q, axis=1)
        else:
            d = point_triangle_distance2_many(q, cor[:, 0], cor[:, 1], cor[:, 2])
        return live[np.lexsort((live, d))].tolist()

    def _candidates(self, entry: QueueEntry):
        """Facets to try for one queue entry, at most ``fallback_breadth`` guard runs.

        First the recorded nearest facet (or, for a point already lying on
        the surface, the facet it touches), then the next-nearest facets that
        face the point. Facets the point lies outside of are not counted.
        """
        p = entry.point_id
        first = entry.facet_id
        if self.dist2[p] < self.tol * self.tol and self.nearest[p] in self.mesh.facets:
            first = int(self.nearest[p])
        if first in self.mesh.facets:
            yield first
        budget = self.config.fallback_breadth - 1
        if budget <= 0:
            return
        for fid in self._facing(p):
            if fid == first:
                continue
            yield fid
            budget -= 1
            if budget == 0:
                return

    # -- passes -------------------------------------------------------------
    def run_pass(self) -> int:
        """One sweep of the pending queue. Returns the number of insertions."""
        self.passes += 1
        t0 = time.perf_counter()
        queue = compute_priorities(self.pending, self.mesh, self.cloud, self.config.priority)
        self.timings["prioritize"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        replaced: set[int] = set()
        inserted = 0
        for entry in queue:
            p = entry.point_id
            if entry.facet_id in replaced:
                self.status[p] = Status.PENDING
                self._record(Action.SKIPPED_SHARED_FACET, p, entry.facet)
                continue
            decision = None
            for fid in self._candidates(entry):
                decision = _guard(self.mesh, self.index, fid, p, np.flatnonzero(self.pending_mask))
                if decision.legal:
                    replaced.add(fid)
                    self._insert(fid, p)
                    self.blocked.pop(p, None)
                    inserted += 1
                    break
            else:
                self.status[p] = Status.DEFERRED
                if decision is not None:
                    self.blocked[p] = decision
                self._record(Action.DEFERRED, p, entry.facet)
        self.timings["insert_guard"] += time.perf_counter() - t0
        return inserted

    def run(self) -> ContractionResult:
        outcome = Outcome.COMPLETE
        while self.pending:
            if self.passes >= self.config.max_passes:
                outcome = Outcome.STALLED
                break
            if self.run_pass() == 0:
                outcome = Outcome.STALLED
                break
        return ContractionResult(
            mesh=self.mesh, trace=self.trace, outcome=outcome, hull_vertices=self.hull_vertices,
            insertions=self.k, passes=self.passes,
            blocked={p: d for p, d in sorted(self.blocked.items()) if self.status[p] is not Status.ON_SURFACE},
            timings=dict(self.timings))


def contract(cloud: PointCloud, config: ContractionConfig | None = None) -> ContractionResult:
    """Contract the convex hull of ``cloud`` onto every cloud point.

    The result unpacks as ``(mesh, trace, outcome)``. STALLED is a normal
    outcome; ``result.blocked`` maps each stranded point to the guard
    decision that last refused it.
    """
    if len(cloud) < 4:
        raise DimensionalDeficiencyError(f"need at least 4 points, got {len(cloud)}")
    return Contraction(cloud, config).run()
