"""Contract the convex hull of a 3D point cloud onto a concave surface through every point."""
from .contraction import (
    Action,
    ContractionConfig,
    ContractionResult,
    ContractionTrace,
    Outcome,
    Priority,
    compute_priorities,
    contract,
    guard_insertion,
    split_facet,
)
from .errors import (
    ConfigError,
    DegenerateFacetError,
    DimensionalDeficiencyError,
    DuplicateVertexError,
    HullwrapError,
    InconsistentInputError,
    InvalidMeshError,
    ParseError,
)
from .hull import classify_points, convex_hull
from .mesh import PointCloud, SurfaceMesh
from .mesh_io import generate_cloud, read_cloud, read_mesh, write_mesh, write_trace
from .validation import (
    ValidationReport,
    containment_check,
    directed_hausdorff,
    is_closed_manifold,
    self_intersection_free,
    surface_metric,
    validate,
)

__version__ = "0.1.0"
