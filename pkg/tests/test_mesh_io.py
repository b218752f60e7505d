import numpy as np
import pytest

from hullwrap import ContractionConfig, PointCloud, contract, convex_hull, generate_cloud
from hullwrap.errors import ConfigError, DimensionalDeficiencyError, ParseError
from hullwrap.mesh_io import read_cloud, read_mesh, read_trace, write_cloud, write_mesh, write_trace

from conftest import CUBE, TETRA


def write(path, text):
    path.write_text(text)
    return path


def test_xyz_tetrahedron(tmp_path):
    f = write(tmp_path / "t.xyz", "# tetra\n0 0 0\n1 0 0\n\n0 1 0\n0 0 1  # apex\n")
    cloud = read_cloud(f)
    assert len(cloud) == 4
    assert np.array_equal(cloud.points, TETRA)


def test_csv_duplicate_row_merged(tmp_path):
    f = write(tmp_path / "c.csv", "x,y,z\n0,0,0\n1,0,0\n0,1,0\n1,0,0\n0,0,1\n")
    with pytest.warns(UserWarning, match="merged 1"):
        cloud = read_cloud(f)
    assert len(cloud) == 4
    assert cloud.merged == ((3, 1),)


def test_csv_without_header(tmp_path):
    f = write(tmp_path / "c.csv", "0,0,0\n1,0,0\n0,1,0\n0,0,1\n")
    assert len(read_cloud(f)) == 4


@pytest.mark.parametrize("name, text, lineno", [
    ("bad.xyz", "0 0 0\n1 0 0\n0 1\n0 0 1\n", 3),
    ("bad.xyz", "0 0 0\n1 0 zero\n0 1 0\n0 0 1\n", 2),
    ("bad.xyz", "0 0 0\n1 0 0\n0 1 0\nnan 0 1\n", 4),
    ("bad.csv", "x,y,z\n0,0,0\n1,0,0,7\n", 3),
    ("bad.ply", "ply\nformat binary_little_endian 1.0\n", 2),
    ("bad.ply", "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                "property float z\nend_header\n0 0 0\n1 2\n", 9),
])
def test_parse_errors_carry_line_numbers(tmp_path, name, text, lineno):
    f = write(tmp_path / name, text)
    with pytest.raises(ParseError) as err:
        read_cloud(f)
    assert err.value.lineno == lineno
    assert f"{name}:{lineno}:" in str(err.value)


def test_too_few_points_after_dedup(tmp_path):
    f = write(tmp_path / "d.xyz", "0 0 0\n1 0 0\n0 1 0\n0 1 0\n")
    with pytest.warns(UserWarning), pytest.raises(DimensionalDeficiencyError):
        read_cloud(f)


def test_vertex_only_ply(tmp_path):
    f = write(tmp_path / "v.ply", "ply\nformat ascii 1.0\ncomment x\nelement vertex 4\nproperty float x\n"
                                  "property float y\nproperty float z\nproperty uchar red\nend_header\n"
                                  "0 0 0 1\n1 0 0 1\n0 1 0 1\n0 0 1 1\n")
    assert np.array_equal(read_cloud(f).points, TETRA)


def test_tetra_obj_layout(tmp_path, tetra):
    out = tmp_path / "t.obj"
    write_mesh(convex_hull(tetra), out)
    lines = out.read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 4
    assert sum(l.startswith("f ") for l in lines) == 4
    assert min(int(t) for l in lines if l.startswith("f ") for t in l.split()[1:]) == 1


@pytest.mark.parametrize("fmt", ["obj", "ply"])
def test_mesh_round_trip(tmp_path, ball50, fmt):
    mesh = contract(ball50).mesh
    out = tmp_path / f"m.{fmt}"
    write_mesh(mesh, out)
    back = read_mesh(out)
    assert np.array_equal(back.points, ball50.points)
    assert list(back.facets.values()) == list(mesh.facets.values())
    assert np.array_equal(read_cloud(out).points, ball50.points)


@pytest.mark.parametrize("ext", ["xyz", "csv"])
def test_cloud_round_trip(tmp_path, ball50, ext):
    out = tmp_path / f"c.{ext}"
    write_cloud(ball50, out)
    assert np.array_equal(read_cloud(out).points, ball50.points)


def test_obj_polygons_fanned_and_relative_indices(tmp_path):
    f = write(tmp_path / "q.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\nf -1 -2 -3\n")
    mesh = read_mesh(f)
    assert list(mesh.facets.values()) == [(0, 1, 2), (0, 2, 3), (3, 2, 1)]


def test_obj_bad_index(tmp_path):
    f = write(tmp_path / "q.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 9\n")
    with pytest.raises(ParseError, match="out of range"):
        read_mesh(f)


def test_unsupported_mesh_format(tmp_path, tetra):
    with pytest.raises(ConfigError):
        write_mesh(convex_hull(tetra), tmp_path / "t.stl")


def test_generators():
    shell = generate_cloud("sphere-shell(50,7)")
    assert np.allclose(np.linalg.norm(shell.points, axis=1), 1.0, rtol=0, atol=1e-12)
    assert np.array_equal(generate_cloud("ball-uniform(500,7)").points, generate_cloud("ball-uniform(500,7)").points)
    assert np.all(np.linalg.norm(generate_cloud("ball-uniform(200,1)").points, axis=1) <= 1.0)
    lobes = generate_cloud("two-lobes(100,3)")
    assert len(convex_hull(lobes).vertex_ids) / len(lobes) < 0.6
    assert len(generate_cloud("gaussian-blob(30,1)")) == 30


@pytest.mark.parametrize("spec", ["donut(10,1)", "ball-uniform(10)", "ball-uniform[10,1]", "ball-uniform(0,1)"])
def test_bad_generator_spec(spec):
    with pytest.raises(ConfigError):
        generate_cloud(spec)


def test_seed_override():
    assert np.array_equal(generate_cloud("ball-uniform(20)", seed=4).points,
                          generate_cloud("ball-uniform(20,4)").points)


def test_read_cloud_accepts_generator_spec():
    assert len(read_cloud("gaussian-blob(40,2)")) == 40


def test_trace_one_insertion(tmp_path, cube_center):
    result = contract(cube_center, ContractionConfig(snapshots=True))
    write_trace(result.trace, tmp_path)
    rows = read_trace(tmp_path / "trace.csv")
    assert len(rows) == 2
    assert [r["action"] for r in rows] == ["INITIAL", "INSERTED"]
    assert sorted(p.name for p in tmp_path.glob("step_*.obj")) == ["step_0000.obj", "step_0001.obj"]


def test_trace_csv_metric_decreasing(tmp_path, ball50):
    result = contract(ball50, ContractionConfig(snapshots=True))
    write_trace(result.trace, tmp_path)
    rows = [r for r in read_trace(tmp_path / "trace.csv") if r["action"] in ("INITIAL", "INSERTED")]
    assert all(b["metric"] < a["metric"] for a, b in zip(rows, rows[1:]))
    assert len(list(tmp_path.glob("step_*.obj"))) == result.insertions + 1


def test_empty_trace_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_trace([], tmp_path)


def test_outputs_byte_identical(tmp_path, ball50):
    for name in ("a", "b"):
        result = contract(PointCloud(ball50.points.copy()), ContractionConfig(snapshots=True))
        write_mesh(result.mesh, tmp_path / f"{name}.ply")
        write_trace(result.trace, tmp_path / name)
    assert (tmp_path / "a.ply").read_bytes() == (tmp_path / "b.ply").read_bytes()
    assert (tmp_path / "a/trace.csv").read_bytes() == (tmp_path / "b/trace.csv").read_bytes()
