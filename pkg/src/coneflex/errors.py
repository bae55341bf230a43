"""Exception hierarchy shared by all modules."""


class ConeflexError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(ConeflexError, ValueError):
    """Invalid geometric input (off the quadric, degenerate line, ...)."""


class ValidationError(ConeflexError, ValueError):
    """Malformed or inconsistent combinatorial data."""


class FlexError(ConeflexError, ValueError):
    """A velocity field fails to be an isometric deformation."""


class GluingError(ConeflexError, ValueError):
    """Inconsistent gluing schema or assembly failure."""


class SearchError(ConeflexError, RuntimeError):
    """A numerical search exhausted its budget without converging."""
