"""Reading and writing clouds, meshes and traces; synthetic cloud generators.

Floats are written with ``repr`` (shortest round-trip form), so a written
file reads back to bit-identical coordinates.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionalDeficiencyError, ParseError
from .mesh import PointCloud, SurfaceMesh

_SPEC = re.compile(r"^\s*([A-Za-z][\w-]*)\s*\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\)\s*$")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def ball_uniform(n: int, seed: int) -> np.ndarray:
    """Uniform in the unit ball."""
    rng = np.random.default_rng(seed)
    return _unit_vectors(rng, n) * rng.random(n)[:, None] ** (1.0 / 3.0)


def sphere_shell(n: int, seed: int) -> np.ndarray:
    """On the unit sphere (radius 1 up to rounding): every point is extreme."""
    return _unit_vectors(np.random.default_rng(seed), n)


def gaussian_blob(n: int, seed: int) -> np.ndarray:
    """Isotropic standard normal."""
    return np.random.default_rng(seed).normal(size=(n, 3))


def two_lobes(n: int, seed: int) -> np.ndarray:
    """Two unit balls centred at x = -1.5 and x = +1.5 (a concave union)."""
    rng = np.random.default_rng(seed)
    p = ball_uniform(n, seed)
    side = np.where(rng.random(n) < 0.5, -1.5, 1.5)
    p[:, 0] += side
    return p


GENERATORS = {
    "ball-uniform": ball_uniform,
    "sphere-shell": sphere_shell,
    "gaussian-blob": gaussian_blob,
    "two-lobes": two_lobes,
}


def parse_generator(spec: str, seed: int | None = None) -> tuple[str, int, int]:
    """``name(n,seed)`` -> (name, n, seed). ``seed`` overrides the spec's."""
    m = _SPEC.match(spec)
    if not m:
        raise ConfigError(f"bad generator spec {spec!r}; expected name(n,seed)")
    name, n = m.group(1), int(m.group(2))
    if name not in GENERATORS:
        raise ConfigError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
    if seed is None:
        if m.group(3) is None:
            raise ConfigError(f"generator spec {spec!r} has no seed")
        seed = int(m.group(3))
    if n < 1:
        raise ConfigError("generator needs n >= 1")
    return name, n, seed


def generate_cloud(spec: str, seed: int | None = None) -> PointCloud:
    """Cloud from a generator spec such as ``ball-uniform(500,1)``.

    Same spec, same bits. Fewer than four points is allowed here; the
    contraction step rejects them.
    """
    name, n, seed = parse_generator(spec, seed)
    return PointCloud.from_points(GENERATORS[name](n, seed))


def is_generator_spec(source) -> bool:
    return isinstance(source, str) and bool(_SPEC.match(source)) and not Path(source).exists()


# ---------------------------------------------------------------------------
# clouds
# ---------------------------------------------------------------------------

def _floats(tokens, path, lineno, expect=3):
    if len(tokens) != expect:
        raise ParseError(f"expected {expect} numbers, got {len(tokens)}", path, lineno)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"not a number in {' '.join(tokens)!r}", path, lineno) from None
    if not all(math.isfinite(v) for v in vals):
        raise ParseError("non-finite coordinate", path, lineno)
    return vals


def _read_xyz(path: Path) -> list[list[float]]:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append(_floats(line.split(), path, lineno))
    return rows


def _read_csv(path: Path) -> list[list[float]]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            rec = [t.strip() for t in rec]
            if not rec or not any(rec) or rec[0].startswith("#"):
                continue
            if not rows and [t.lower() for t in rec] == ["x", "y", "z"]:
                continue
            rows.append(_floats(rec, path, lineno))
    return rows


@dataclass
class _PlyElement:
    name: str
    count: int
    props: list[tuple[str, bool]]  # (name, is_list)


def _ply_header(fh, path):
    first = fh.readline().strip()
    if first != "ply":
        raise ParseError("missing 'ply' magic", path, 1)
    elements: list[_PlyElement] = []
    lineno = 1
    for line in fh:
        lineno += 1
        tok = line.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise ParseError("only ASCII PLY is supported", path, lineno)
        elif tok[0] == "element":
            if len(tok) != 3 or not tok[2].isdigit():
                raise ParseError("malformed element line", path, lineno)
            elements.append(_PlyElement(tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if not elements:
                raise ParseError("property before any element", path, lineno)
            elements[-1].props.append((tok[-1], tok[1] == "list"))
        elif tok[0] == "end_header":
            return elements, lineno
        else:
            raise ParseError(f"unexpected header keyword {tok[0]!r}", path, lineno)
    raise ParseError("missing end_header", path, lineno)


def _read_ply(path: Path, want_faces: bool = False):
    verts, faces = [], []
    with open(path) as fh:
        elements, lineno = _ply_header(fh, path)
        for el in elements:
            names = [p for p, _ in el.props]
            if el.name == "vertex":
                try:
                    cols = [names.index(a) for a in "xyz"]
                except ValueError:
                    raise ParseError("vertex element lacks x/y/z", path, lineno) from None
                if any(is_list for _, is_list in el.props):
                    raise ParseError("list property on vertex element", path, lineno)
            for _ in range(el.count):
                line = fh.readline()
                lineno += 1
                if not line:
                    raise ParseError(f"file ends inside element {el.name!r}", path, lineno)
                tok = line.split()
                if el.name == "vertex":
                    if len(tok) != len(names):
                        raise ParseError(f"expected {len(names)} values, got {len(tok)}", path, lineno)
                    verts.append(_floats([tok[c] for c in cols], path, lineno))
                elif el.name == "face" and want_faces:
                    try:
                        k = int(tok[0])
                        idx = [int(t) for t in tok[1:1 + k]]
                    except (ValueError, IndexError):
                        raise ParseError("malformed face", path, lineno) from None
                    if len(idx) != k:
                        raise ParseError("face shorter than its count", path, lineno)
                    faces.append((idx, lineno))
    return verts, faces


def read_cloud(source, *, seed: int | None = None, dedup: bool = True) -> PointCloud:
    """Cloud from a file (XYZ, CSV, ASCII PLY, or the vertices of an OBJ) or a
    generator spec.

    Parse errors carry the offending line number. Near-duplicates are merged
    with a warning. Raises :class:`DimensionalDeficiencyError` when fewer
    than four points remain.
    """
    if is_generator_spec(source):
        cloud = generate_cloud(source, seed)
    else:
        path = Path(source)
        if not path.exists():
            raise ParseError("no such file", path)
        ext = path.suffix.lower()
        if ext == ".csv":
            rows = _read_csv(path)
        elif ext == ".ply":
            rows, _ = _read_ply(path)
        elif ext == ".obj":
            rows = read_mesh(path).points.tolist()
        else:
            rows = _read_xyz(path)
        cloud = PointCloud.from_points(np.array(rows, dtype=float).reshape(-1, 3), dedup=dedup)
    if len(cloud) < 4:
        raise DimensionalDeficiencyError(f"need at least 4 distinct points, got {len(cloud)}")
    return cloud


def write_cloud(cloud: PointCloud | np.ndarray, path) -> None:
    """Write points as XYZ or CSV (by extension)."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    path = Path(path)
    sep = "," if path.suffix.lower() == ".csv" else " "
    with open(path, "w") as fh:
        if sep == ",":
            fh.write("x,y,z\n")
        for p in pts.tolist():
            fh.write(sep.join(map(repr, p)) + "\n")


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

def _format(path: Path, fmt: str | None) -> str:
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in ("obj", "ply"):
        raise ConfigError(f"unsupported mesh format {fmt!r}; use obj or ply")
    return fmt


def write_mesh(mesh: SurfaceMesh, path, fmt: str | None = None) -> None:
    """Write every coordinate row (cloud id order) and all facets, 1-indexed in OBJ."""
    path = Path(path)
    fmt = _format(path, fmt)
    coords = mesh.points.tolist()
    facets = list(mesh.facets.values())
    with open(path, "w") as fh:
        if fmt == "obj":
            fh.write(f"# {len(coords)} vertices, {len(facets)} facets\n")
            for x, y, z in coords:
                fh.write(f"v {x!r} {y!r} {z!r}\n")
            for a, b, c in facets:
                fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
        else:
            fh.write("ply\nformat ascii 1.0\n")
            fh.write(f"element vertex {len(coords)}\n")
            fh.write("property double x\nproperty double y\nproperty double z\n")
            fh.write(f"element face {len(facets)}\n")
            fh.write("property list uchar int vertex_indices\nend_header\n")
            for x, y, z in coords:
                fh.write(f"{x!r} {y!r} {z!r}\n")
            for a, b, c in facets:
                fh.write(f"3 {a} {b} {c}\n")


def _obj_index(tok: str, n: int, path, lineno) -> int:
    head = tok.split("/", 1)[0]
    try:
        i = int(head)
    except ValueError:
        raise ParseError(f"bad face index {tok!r}", path, lineno) from None
    if i == 0:
        raise ParseError("OBJ indices start at 1", path, lineno)
    return i - 1 if i > 0 else n + i


def read_mesh(path) -> SurfaceMesh:
    """Triangle mesh from OBJ or ASCII PLY. Polygons are fanned; bad indices raise."""
    path = Path(path)
    fmt = _format(path, None)
    verts: list[list[float]] = []
    faces: list[tuple[list[int], int]] = []
    if fmt == "obj":
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                tok = line.split("#", 1)[0].split()
                if not tok:
                    continue
                if tok[0] == "v":
                    verts.append(_floats(tok[1:4], path, lineno))
                elif tok[0] == "f":
                    faces.append(([_obj_index(t, len(verts), path, lineno) for t in tok[1:]], lineno))
    else:
        verts, faces = _read_ply(path, want_faces=True)
    tris = []
    for idx, lineno in faces:
        if len(idx) < 3:
            raise ParseError("face with fewer than 3 vertices", path, lineno)
        if any(i < 0 or i >= len(verts) for i in idx):
            raise ParseError("face index out of range", path, lineno)
        tris.extend((idx[0], idx[j], idx[j + 1]) for j in range(1, len(idx) - 1))
    return SurfaceMesh(np.array(verts, dtype=float).reshape(-1, 3), tris)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ("k", "point_id", "action", "metric", "volume", "area")


def write_trace(trace, directory) -> Path:
    """Write ``trace.csv`` (one row per record) and any mesh snapshots.

    Snapshots are stored as ``step_0000.obj``, ``step_0001.obj``, ... with
    step 0 the initial hull. Returns the CSV path.
    """
    steps = list(getattr(trace, "steps", trace))
    if not steps:
        raise ValueError("empty trace")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trace.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for s in steps:
            w.writerow([s.k, s.point_id, s.action.value, repr(s.metric), repr(s.volume), repr(s.area)])
    for i, snap in enumerate(getattr(trace, "snapshots", ()) or ()):
        write_mesh(snap, out / f"step_{i:04d}.obj")
    return csv_path


def read_trace(path) -> list[dict]:
    """Rows of a trace CSV with numeric fields converted."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(TRACE_COLUMNS) <= set(reader.fieldnames):
            raise ParseError(f"trace header must contain {','.join(TRACE_COLUMNS)}", path, 1)
        for lineno, rec in enumerate(reader, 2):
            try:
                rows.append({
                    "k": int(rec["k"]),
                    "point_id": int(rec["point_id"]),
                    "action": rec["action"],
                    "metric": float(rec["metric"]),
                    "volume": float(rec["volume"]),
                    "area": float(rec["area"]),
                })
            except (TypeError, ValueError):
                raise ParseError("malformed trace row", path, lineno) from None
    return rows
