"""Exception hierarchy shared by every hullwrap module."""


class HullwrapError(Exception):
    """Base class for all library errors."""


class DimensionalDeficiencyError(HullwrapError):
    """Fewer than four points, or all points coplanar/collinear."""


class DegenerateFacetError(HullwrapError):
    """A triangle is too thin (or has repeated vertices) to be a valid facet."""


class DuplicateVertexError(HullwrapError):
    """An inserted point coincides with an existing facet vertex."""


class InconsistentInputError(HullwrapError):
    """A mesh and a cloud (or a trace) do not belong together."""


class InvalidMeshError(HullwrapError):
    """A mesh violates a precondition (e.g. not closed) of the requested check."""


class ParseError(HullwrapError):
    """A malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        super().__init__(where + message)


class ConfigError(HullwrapError):
    """Bad generator spec, CLI flag combination, or configuration value."""
