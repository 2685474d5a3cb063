"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid user-supplied parameter (level out of range, unknown name, ...)."""


class MeshError(ValueError):
    """Mesh connectivity or geometry violates a structural invariant."""


class UnsupportedOperationError(RuntimeError):
    """Operation needs information the object does not carry."""


class GeometryError(ValueError):
    """Degenerate element geometry."""


class AssemblyError(RuntimeError):
    """A coefficient evaluated to a non-finite value during assembly."""


class NotPositiveDefiniteError(ArithmeticError):
    """Factorization met a nonpositive pivot."""

    def __init__(self, message, pivot_index=None, pivot_value=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value


class ConvergenceError(ArithmeticError):
    """An iterative method exhausted its budget or stagnated."""


class SolverError(RuntimeError):
    """Picard iteration aborted because the linear subsolver failed."""

    def __init__(self, message, iteration, diagnostics=None):
        super().__init__(message)
        self.iteration = iteration
        self.diagnostics = diagnostics or {}
