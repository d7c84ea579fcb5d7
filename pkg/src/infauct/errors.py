"""Exception types shared across the package."""


class InputError(ValueError):
    """Arguments or input files violate a documented contract."""


class SizeGuardError(InputError):
    """An instance exceeds a hard size limit."""


class UnsupportedInstanceError(InputError):
    """An operation needs a finite discrete instance but got a continuous one."""


class SolverFailureError(RuntimeError):
    """The LP solver could not certify an optimal solution."""
