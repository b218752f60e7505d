"""Point clouds and indexed triangle meshes."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geom import signed_tet_volume, triangle_area

#: duplicate-merge radius, relative to the bounding-box diagonal
DUPLICATE_RATIO = 1e-9


def _canonical(f: Sequence[int]) -> tuple[int, int, int]:
    a, b, c = f
    if a <= b and a <= c:
        return (a, b, c)
    if b <= a and b <= c:
        return (b, c, a)
    return (c, a, b)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Immutable indexed point set. Ids are row positions in ``points``."""

    points: np.ndarray
    merged: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points, dedup: bool = True) -> "PointCloud":
        """Build a cloud, merging points closer than 1e-9 x bbox diagonal.

        Input order is preserved; a merged point is dropped in favour of the
        earliest point it duplicates, and a warning is emitted.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if not dedup or len(pts) < 2:
            return cls(pts)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        radius = DUPLICATE_RATIO * diag
        pairs = cKDTree(pts).query_pairs(radius if radius > 0 else 0.0, output_type="ndarray")
        if radius == 0.0:
            # all points identical
            pairs = np.array([(0, j) for j in range(1, len(pts))], dtype=int).reshape(-1, 2)
        if len(pairs) == 0:
            return cls(pts)
        partners: dict[int, list[int]] = {}
        for i, j in sorted(map(tuple, pairs.tolist())):
            partners.setdefault(j, []).append(i)
        keep = np.ones(len(pts), dtype=bool)
        target = {}
        for j in range(len(pts)):
            for i in partners.get(j, ()):
                if keep[i]:
                    keep[j] = False
                    target[j] = i
                    break
        new_id = np.cumsum(keep) - 1
        merged = tuple((j, int(new_id[i])) for j, i in sorted(target.items()))
        warnings.warn(f"merged {len(merged)} duplicate point(s) within {radius:.3g}", stacklevel=2)
        return cls(pts[keep], merged=merged)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def tuples(self) -> list[tuple[float, float, float]]:
        return [tuple(p) for p in self.points.tolist()]

    @cached_property
    def bbox_diagonal(self) -> float:
        if len(self.points) == 0:
            return 0.0
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))


class SurfaceMesh:
    """Triangle mesh whose vertices are ids into a shared coordinate array.

    Facets are stored by integer id in insertion order; ids are never reused,
    so a facet id names one triangle for the lifetime of the mesh. No
    manifoldness is enforced here (files may describe broken meshes); use
    :func:`hullwrap.validation.is_closed_manifold` to check.
    """

    def __init__(self, points, facets: Iterable[Sequence[int]] = ()):
        if isinstance(points, PointCloud):
            points = points.points
        self.points = np.asarray(points, dtype=float)
        self.coords = [tuple(p) for p in self.points.tolist()]
        self.facets: dict[int, tuple[int, int, int]] = {}
        self._by_key: dict[tuple[int, int, int], int] = {}
        self._valence: dict[int, int] = {}
        self._next_id = 0
        for f in facets:
            self.add_facet(f)

    def __len__(self) -> int:
        return len(self.facets)

    def __repr__(self) -> str:
        return f"SurfaceMesh(vertices={len(self._valence)}, facets={len(self.facets)})"

    # -- mutation -----------------------------------------------------------
    def add_facet(self, f: Sequence[int]) -> int:
        a, b, c = (int(v) for v in f)
        fid = self._next_id
        self._next_id += 1
        self.facets[fid] = (a, b, c)
        self._by_key.setdefault(_canonical((a, b, c)), fid)
        for v in (a, b, c):
            self._valence[v] = self._valence.get(v, 0) + 1
        return fid

    def remove_facet(self, fid: int) -> tuple[int, int, int]:
        f = self.facets.pop(fid)
        key = _canonical(f)
        if self._by_key.get(key) == fid:
            del self._by_key[key]
        for v in f:
            n = self._valence[v] - 1
            if n:
                self._valence[v] = n
            else:
                del self._valence[v]
        return f

    def copy(self) -> "SurfaceMesh":
        out = SurfaceMesh.__new__(SurfaceMesh)
        out.points = self.points
        out.coords = self.coords
        out.facets = dict(self.facets)
        out._by_key = dict(self._by_key)
        out._valence = dict(self._valence)
        out._next_id = self._next_id
        return out

    # -- queries ------------------------------------------------------------
    def find_facet(self, f: Sequence[int]) -> int | None:
        """Facet id of an index triple (any rotation of its winding), or None."""
        return self._by_key.get(_canonical(tuple(int(v) for v in f)))

    def triangle(self, fid: int):
        a, b, c = self.facets[fid]
        return (self.coords[a], self.coords[b], self.coords[c])

    def is_vertex(self, v: int) -> bool:
        return v in self._valence

    @property
    def vertex_ids(self) -> list[int]:
        return sorted(self._valence)

    @property
    def n_vertices(self) -> int:
        return len(self._valence)

    def facet_array(self) -> np.ndarray:
        if not self.facets:
            return np.zeros((0, 3), dtype=np.int64)
        return np.array(list(self.facets.values()), dtype=np.int64)

    def edges(self) -> set[tuple[int, int]]:
        """Undirected edges as sorted pairs."""
        out = set()
        for a, b, c in self.facets.values():
            for u, v in ((a, b), (b, c), (c, a)):
                out.add((u, v) if u < v else (v, u))
        return out

    def edge_adjacency(self) -> dict[tuple[int, int], list[int]]:
        """Undirected edge -> ids of incident facets, in facet order."""
        adj: dict[tuple[int, int], list[int]] = {}
        for fid, (a, b, c) in self.facets.items():
            for u, v in ((a, b), (b, c), (c, a)):
                adj.setdefault((u, v) if u < v else (v, u), []).append(fid)
        return adj

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + len(self.facets)

    @cached_property
    def reference_point(self) -> tuple[float, float, float]:
        """Volume origin: the bounding-box centre of the coordinate array."""
        if len(self.points) == 0:
            return (0.0, 0.0, 0.0)
        return tuple(((self.points.max(axis=0) + self.points.min(axis=0)) / 2.0).tolist())

    def volume_terms(self) -> dict[int, float]:
        o = self.reference_point
        return {fid: signed_tet_volume(o, self.triangle(fid)) for fid in self.facets}

    def volume(self) -> float:
        """Enclosed (signed) volume via the divergence theorem."""
        return math.fsum(self.volume_terms().values())

    def area(self) -> float:
        return math.fsum(triangle_area(self.triangle(fid)) for fid in self.facets)
