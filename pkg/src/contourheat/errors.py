"""Exception types raised across the package."""


class ContourHeatError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(ContourHeatError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ContourHeatError):
    """A factorization hit a numerically singular pivot."""

    def __init__(self, pivot_index, pivot_value):
        self.pivot_index = int(pivot_index)
        self.pivot_value = pivot_value
        super().__init__(
            f"numerically singular pivot {pivot_value!r} at index {pivot_index}"
        )


class MeshFormatError(ContourHeatError):
    """A mesh file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" ({loc})"
        super().__init__(f"{message}{loc}")


class DegenerateGeometryError(ContourHeatError):
    """A mesh element is degenerate (zero or negative area)."""


class OptimizationError(ContourHeatError):
    """A scalar optimization failed to produce a usable result."""


class FactorizationError(ContourHeatError):
    """An incomplete factorization broke down beyond repair."""


class IterationBreakdownError(ContourHeatError):
    """An iterative solver hit a zero denominator with residual left."""


class ConfigError(ContourHeatError):
    """Invalid run configuration or CLI arguments."""
