"""Exception types raised across the package."""


class InvalidInput(ValueError):
    """Input data violates a documented precondition or invariant."""


class PreconditionError(ValueError):
    """A hypothesis required by a check is not met by the supplied data."""


class NoncompactError(ValueError):
    """A volume-dependent quantity was requested on a noncompact model."""


class ConventionError(RuntimeError):
    """Internal result fails a symmetry check; indicates a sign/convention bug."""


class ReductionMismatchError(RuntimeError):
    """Reduced-family gradient disagrees with the full Euler-Lagrange tensor."""
