"""Exception hierarchy; the CLI maps these onto process exit codes."""


class CubulandError(Exception):
    """Base class for package errors."""


class InputError(CubulandError):
    """Invalid or inconsistent input data (CLI exit code 2)."""


class MixedKindError(InputError):
    """Walls of different wallspace kinds were compared."""


class DegenerateBasepointError(InputError):
    """Basepoint lies on a wall, so no side can be chosen for it."""


class InvalidLatticeError(InputError):
    """Lattice vectors are dependent or do not move a listed line."""


class BelowMinimumError(InputError):
    """Family count is below the minimum the classification requires."""


class InvalidRetwistError(InputError):
    """Retwist coefficients do not sum to zero on some block."""


class UnsupportedConfigurationError(InputError):
    """Operation is not defined for this configuration; see message."""


class BudgetError(CubulandError):
    """A configured budget was exceeded (CLI exit code 3)."""

    def __init__(self, message, count=None, budget=None):
        super().__init__(message)
        self.count = count
        self.budget = budget


class PartialResultError(BudgetError):
    """Vertex budget hit during a breadth-first build; carries partial state."""

    def __init__(self, message, vertices=(), frontier=(), budget=None):
        super().__init__(message, count=len(vertices), budget=budget)
        self.vertices = tuple(vertices)
        self.frontier = tuple(frontier)


class StructuralFailureError(CubulandError):
    """A certified structural property failed: a bug trap, not a user error."""
