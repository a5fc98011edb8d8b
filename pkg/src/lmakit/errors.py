"""Exception hierarchy shared across the toolkit."""


class LmaError(Exception):
    """Base class for all toolkit errors."""


class SequenceFormatError(LmaError):
    """Raised when a sequence file cannot be parsed or violates the schema."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f" [{path}"
            if line is not None:
                where += f":{line}"
            where += "]"
        super().__init__(message + where)


class SkeletonError(LmaError):
    """Invalid skeleton definition or unresolvable role."""


class GapError(LmaError):
    """Missing-data gap that cannot be repaired."""

    def __init__(self, message, joint=None, frames=None):
        self.joint = joint
        self.frames = frames
        super().__init__(message)


class DegenerateFitError(LmaError):
    """Numerically singular fit (e.g. all points at the same depth)."""


class SchemaError(LmaError):
    """Mismatch between a model/CSV schema and the canonical feature layout."""
