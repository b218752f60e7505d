"""Exact-sign predicates and primitive triangle geometry.

Every predicate here returns the *correct* sign for any finite double input:
a floating-point evaluation is accepted when it clears Shewchuk's static
error bound, otherwise the determinant is re-evaluated with
exact integer arithmetic (every double is an integer times a power of two).

Points are plain ``(x, y, z)`` sequences; triangles are 3-sequences of points.
Orientation convention: ``orientation(p, q, r, s)`` is the sign of
``det[q - p, r - p, s - p]``, so the unit tetrahedron is ``+1`` and a point
on the outward side of a counter-clockwise facet ``(p, q, r)`` is ``+1``.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateFacetError

_EPS = 2.0 ** -53
_O3D_ERRBOUND = (7.0 + 56.0 * _EPS) * _EPS
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS

#: relative area threshold below which a triangle is rejected as degenerate
DEGENERACY_RATIO = 1e-12


# ---------------------------------------------------------------------------
# orientation predicates
# ---------------------------------------------------------------------------

def _as_integers(values) -> list[int]:
    # doubles are dyadic rationals: scale all of them to one power-of-two
    # denominator and the arithmetic below is exact integer arithmetic
    ratios = [float(v).as_integer_ratio() for v in values]
    den = max(d for _, d in ratios)
    return [n * (den // d) for n, d in ratios]


def _exact_orientation(p, q, r, s) -> int:
    p, q, r, s = (tuple(float(x) for x in v) for v in (p, q, r, s))
    if p == s or q == s or r == s or p == q or p == r or q == r:
        return 0
    px, py, pz, qx, qy, qz, rx, ry, rz, sx, sy, sz = _as_integers((*p, *q, *r, *s))
    ax, ay, az = qx - px, qy - py, qz - pz
    bx, by, bz = rx - px, ry - py, rz - pz
    cx, cy, cz = sx - px, sy - py, sz - pz
    det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)
    return (det > 0) - (det < 0)


def orientation(p, q, r, s) -> int:
    """Exact sign (-1, 0, +1) of the signed volume of tetrahedron (p, q, r, s)."""
    # Shewchuk's orient3d with s as the reference vertex; it is the negation
    # of our convention.
    sx, sy, sz = s[0], s[1], s[2]
    adx, ady, adz = p[0] - sx, p[1] - sy, p[2] - sz
    bdx, bdy, bdz = q[0] - sx, q[1] - sy, q[2] - sz
    cdx, cdy, cdz = r[0] - sx, r[1] - sy, r[2] - sz
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady)
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    errbound = _O3D_ERRBOUND * permanent
    if det > errbound:
        return -1
    if -det > errbound:
        return 1
    return _exact_orientation(p, q, r, s)


def orientation_many(p, q, r, s) -> np.ndarray:
    """Vectorised :func:`orientation` over broadcastable ``(..., 3)`` arrays.

    Returns an ``int8`` array of signs; uncertain rows are resolved exactly.
    """
    p, q, r, s = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, r, s)))
    d_a = p - s
    d_b = q - s
    d_c = r - s
    adx, ady, adz = d_a[..., 0], d_a[..., 1], d_a[..., 2]
    bdx, bdy, bdz = d_b[..., 0], d_b[..., 1], d_b[..., 2]
    cdx, cdy, cdz = d_c[..., 0], d_c[..., 1], d_c[..., 2]
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady)
    permanent = ((np.abs(bdxcdy) + np.abs(cdxbdy)) * np.abs(adz)
                 + (np.abs(cdxady) + np.abs(adxcdy)) * np.abs(bdz)
                 + (np.abs(adxbdy) + np.abs(bdxady)) * np.abs(cdz))
    errbound = _O3D_ERRBOUND * permanent
    out = np.zeros(det.shape, dtype=np.int8)
    out[det > errbound] = -1
    out[-det > errbound] = 1
    unsure = np.abs(det) <= errbound
    if unsure.any():
        # a query point that is one of the plane's own vertices is exactly 0
        same = (p == s).all(axis=-1) | (q == s).all(axis=-1) | (r == s).all(axis=-1)
        unsure &= ~same
        for idx in map(tuple, np.argwhere(unsure)):
            out[idx] = _exact_orientation(tuple(p[idx].tolist()), tuple(q[idx].tolist()),
                                          tuple(r[idx].tolist()), tuple(s[idx].tolist()))
    return out


def _exact_orient2d(a, b, c) -> int:
    ax, ay, bx, by, cx, cy = _as_integers((a[0], a[1], b[0], b[1], c[0], c[1]))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient2d(a, b, c) -> int:
    """Exact sign of the planar turn a -> b -> c (+1 counter-clockwise)."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    errbound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _exact_orient2d(a, b, c)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def _sub(u, v):
    return (u[0] - v[0], u[1] - v[1], u[2] - v[2])


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def triangle_area(t: Sequence) -> float:
    a, b, c = t
    n = _cross(_sub(b, a), _sub(c, a))
    return 0.5 * math.sqrt(_dot(n, n))


def signed_tet_volume(origin, t: Sequence) -> float:
    """Signed volume of tetrahedron (origin, a, b, c) = det[a-o, b-o, c-o] / 6."""
    a, b, c = t
    u, v, w = _sub(a, origin), _sub(b, origin), _sub(c, origin)
    return _dot(u, _cross(v, w)) / 6.0


def is_degenerate(t: Sequence) -> bool:
    """True when area < 1e-12 x (longest edge)^2, or vertices coincide."""
    a, b, c = t
    ab, bc, ca = _sub(b, a), _sub(c, b), _sub(a, c)
    longest2 = max(_dot(ab, ab), _dot(bc, bc), _dot(ca, ca))
    if longest2 == 0.0:
        return True
    return triangle_area(t) < DEGENERACY_RATIO * longest2


def check_triangle(t: Sequence) -> None:
    if is_degenerate(t):
        raise DegenerateFacetError(f"degenerate triangle {tuple(map(tuple, t))}")


def centroid(t: Sequence):
    a, b, c = t
    return ((a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0)


def centroid_distance(p, t: Sequence) -> float:
    """Euclidean distance from ``p`` to the vertex mean of ``t``."""
    check_triangle(t)
    g = centroid(t)
    return math.dist(p, g)


def _closest_on_segment(p, a, b):
    ab = _sub(b, a)
    denom = _dot(ab, ab)
    t = _dot(_sub(p, a), ab) / denom if denom > 0.0 else 0.0
    t = min(1.0, max(0.0, t))
    return (a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2])


def point_triangle_distance(p, t: Sequence) -> float:
    """True minimum distance from ``p`` to the closed triangle ``t``."""
    check_triangle(t)
    a, b, c = t
    n = _cross(_sub(b, a), _sub(c, a))
    nn = _dot(n, n)
    inside = (_dot(_cross(_sub(b, a), _sub(p, a)), n) >= 0.0
              and _dot(_cross(_sub(c, b), _sub(p, b)), n) >= 0.0
              and _dot(_cross(_sub(a, c), _sub(p, c)), n) >= 0.0)
    if inside:
        return abs(_dot(_sub(p, a), n)) / math.sqrt(nn)
    return min(math.dist(p, _closest_on_segment(p, u, v)) for u, v in ((a, b), (b, c), (c, a)))


def _segment_dist2_many(p, a, b):
    ab = b - a
    ap = p - a
    denom = np.einsum("...i,...i->...", ab, ab)
    t = np.einsum("...i,...i->...", ap, ab) / np.where(denom > 0.0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    d = ap - t[..., None] * ab
    return np.einsum("...i,...i->...", d, d)


def point_triangle_distance2_many(p, a, b, c) -> np.ndarray:
    """Squared point-to-triangle distances over broadcastable ``(..., 3)`` arrays."""
    p = np.asarray(p, dtype=float)
    ab = b - a
    n = np.cross(ab, c - a)
    nn = np.einsum("...i,...i->...", n, n)
    inside = ((np.einsum("...i,...i->...", np.cross(ab, p - a), n) >= 0.0)
              & (np.einsum("...i,...i->...", np.cross(c - b, p - b), n) >= 0.0)
              & (np.einsum("...i,...i->...", np.cross(a - c, p - c), n) >= 0.0))
    h = np.einsum("...i,...i->...", p - a, n)
    plane2 = h * h / np.where(nn > 0.0, nn, 1.0)
    edge2 = np.minimum(np.minimum(_segment_dist2_many(p, a, b), _segment_dist2_many(p, b, c)),
                       _segment_dist2_many(p, c, a))
    return np.where(inside, plane2, edge2)


# ---------------------------------------------------------------------------
# triangle-triangle intersection
# ---------------------------------------------------------------------------

def _drop_axis(a, b, c) -> int:
    n = _cross(_sub(b, a), _sub(c, a))
    mags = (abs(n[0]), abs(n[1]), abs(n[2]))
    return mags.index(max(mags))


def _project(axis: int):
    if axis == 0:
        return lambda v: (v[1], v[2])
    if axis == 1:
        return lambda v: (v[2], v[0])
    return lambda v: (v[0], v[1])


def _on_segment_2d(a, b, p) -> bool:
    # p known collinear with a, b
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_meet_2d(a, b, c, d) -> bool:
    o1, o2 = orient2d(a, b, c), orient2d(a, b, d)
    o3, o4 = orient2d(c, d, a), orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return ((o1 == 0 and _on_segment_2d(a, b, c)) or (o2 == 0 and _on_segment_2d(a, b, d))
            or (o3 == 0 and _on_segment_2d(c, d, a)) or (o4 == 0 and _on_segment_2d(c, d, b)))


def _point_in_tri_2d(p, a, b, c) -> bool:
    s1, s2, s3 = orient2d(a, b, p), orient2d(b, c, p), orient2d(c, a, p)
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def _coplanar_tris_meet(t1, t2) -> bool:
    proj = _project(_drop_axis(*t1))
    a1 = [proj(v) for v in t1]
    a2 = [proj(v) for v in t2]
    for i in range(3):
        for j in range(3):
            if _segments_meet_2d(a1[i], a1[(i + 1) % 3], a2[j], a2[(j + 1) % 3]):
                return True
    return _point_in_tri_2d(a1[0], *a2) or _point_in_tri_2d(a2[0], *a1)


def segment_meets_triangle(u, v, t) -> bool:
    """Closed segment [u, v] against closed triangle ``t``, exactly."""
    a, b, c = t
    o1, o2 = orientation(a, b, c, u), orientation(a, b, c, v)
    if o1 * o2 > 0:
        return False
    if o1 == 0 and o2 == 0:
        proj = _project(_drop_axis(a, b, c))
        pu, pv = proj(u), proj(v)
        pa, pb, pc = proj(a), proj(b), proj(c)
        if _point_in_tri_2d(pu, pa, pb, pc) or _point_in_tri_2d(pv, pa, pb, pc):
            return True
        return (_segments_meet_2d(pu, pv, pa, pb) or _segments_meet_2d(pu, pv, pb, pc)
                or _segments_meet_2d(pu, pv, pc, pa))
    s1 = orientation(u, v, a, b)
    s2 = orientation(u, v, b, c)
    s3 = orientation(u, v, c, a)
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def _ray_in_corner(apex, tip, t, corner: int) -> bool:
    """Does the ray apex->tip start into the closed corner of ``t`` at ``corner``?

    Requires ``tip`` coplanar with ``t`` and ``t[corner] == apex``.
    """
    e, f = t[(corner + 1) % 3], t[(corner + 2) % 3]
    proj = _project(_drop_axis(*t))
    s, pe, pf, pb = proj(apex), proj(e), proj(f), proj(tip)
    side_e = orient2d(s, pe, pb) * orient2d(s, pe, pf)
    side_f = orient2d(s, pf, pb) * orient2d(s, pf, pe)
    return side_e >= 0 and side_f >= 0


def triangles_intersect(t1: Sequence, t2: Sequence, shared: Sequence[tuple[int, int]] = ()) -> bool:
    """Forbidden-contact test between two closed triangles.

    ``shared`` lists ``(i, j)`` corner pairs meaning corner ``i`` of ``t1`` is
    the same mesh vertex as corner ``j`` of ``t2``. Contact confined to those
    shared vertices (or the shared edge) is permitted; anything else, including
    coplanar area overlap across a shared edge, returns True.
    """
    shared = list(shared)
    if len(shared) >= 3:
        return True
    if len(shared) == 2:
        (i1, j1), (i2, j2) = shared
        k1 = 3 - i1 - i2
        k2 = 3 - j1 - j2
        if orientation(t1[0], t1[1], t1[2], t2[k2]) != 0:
            return False
        proj = _project(_drop_axis(*t1))
        u, v = proj(t1[i1]), proj(t1[i2])
        return orient2d(u, v, proj(t1[k1])) * orient2d(u, v, proj(t2[k2])) > 0
    if len(shared) == 1:
        (i, j), = shared
        s = t1[i]
        b1, c1 = t1[(i + 1) % 3], t1[(i + 2) % 3]
        b2, c2 = t2[(j + 1) % 3], t2[(j + 2) % 3]
        if segment_meets_triangle(b1, c1, t2) or segment_meets_triangle(b2, c2, t1):
            return True
        for tip in (b1, c1):
            if orientation(t2[0], t2[1], t2[2], tip) == 0 and _ray_in_corner(s, tip, t2, j):
                return True
        for tip in (b2, c2):
            if orientation(t1[0], t1[1], t1[2], tip) == 0 and _ray_in_corner(s, tip, t1, i):
                return True
        return False

    a1, b1, c1 = t1
    a2, b2, c2 = t2
    d = (orientation(a1, b1, c1, a2), orientation(a1, b1, c1, b2), orientation(a1, b1, c1, c2))
    if (d[0] > 0 and d[1] > 0 and d[2] > 0) or (d[0] < 0 and d[1] < 0 and d[2] < 0):
        return False
    if d == (0, 0, 0):
        return _coplanar_tris_meet(t1, t2)
    e = (orientation(a2, b2, c2, a1), orientation(a2, b2, c2, b1), orientation(a2, b2, c2, c1))
    if (e[0] > 0 and e[1] > 0 and e[2] > 0) or (e[0] < 0 and e[1] < 0 and e[2] < 0):
        return False
    for u, v in ((a1, b1), (b1, c1), (c1, a1)):
        if segment_meets_triangle(u, v, t2):
            return True
    for u, v in ((a2, b2), (b2, c2), (c2, a2)):
        if segment_meets_triangle(u, v, t1):
            return True
    return False


def shared_corners(f1: Sequence[int], f2: Sequence[int]) -> list[tuple[int, int]]:
    """Corner pairs of two index triples that name the same vertex."""
    return [(i, f2.index(v)) for i, v in enumerate(f1) if v in f2]


def triangles_intersect_many(ta: np.ndarray, tb: np.ndarray, ida: np.ndarray, idb: np.ndarray) -> np.ndarray:
    """Row-wise :func:`triangles_intersect` for ``(N, 3, 3)`` coordinate stacks.

    ``ida``/``idb`` are ``(N, 3)`` vertex ids; equal ids mark shared corners.
    Pairs where all non-shared vertices of one triangle lie strictly on one
    side of the other's plane are cleared in bulk (their contact can only be
    the shared vertices/edge); the rest go through the scalar exact test.
    """
    ta = np.asarray(ta, dtype=float)
    tb = np.asarray(tb, dtype=float)
    n = len(ta)
    out = np.zeros(n, dtype=bool)
    if n == 0:
        return out
    eq = ida[:, :, None] == idb[:, None, :]
    sh_a = eq.any(axis=2)
    sh_b = eq.any(axis=1)

    def cleared(plane, verts, shared):
        s = orientation_many(plane[:, None, 0], plane[:, None, 1], plane[:, None, 2], verts)
        free = ~shared
        pos = np.where(free, s > 0, True).all(axis=1)
        neg = np.where(free, s < 0, True).all(axis=1)
        return (pos | neg) & free.any(axis=1)

    todo = ~cleared(ta, tb, sh_b)
    idx = np.flatnonzero(todo)
    if len(idx):
        todo[idx] = ~cleared(tb[idx], ta[idx], sh_a[idx])
    for i in np.flatnonzero(todo).tolist():
        pairs = [(int(r), int(c)) for r, c in zip(*np.nonzero(eq[i]))]
        out[i] = triangles_intersect([tuple(v) for v in ta[i].tolist()], [tuple(v) for v in tb[i].tolist()], pairs)
    return out
