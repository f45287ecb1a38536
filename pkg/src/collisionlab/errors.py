"""Exception hierarchy shared by every module."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NotPSDError(ValidationError):
    """Matrix has an eigenvalue below the negative rank tolerance."""


class SupportError(ValidationError):
    """supp(rho) is not contained in supp(sigma) where finiteness is required."""


class SizeCapError(ValidationError):
    """Requested computation exceeds a documented size cap."""


class ConvergenceError(ArithmeticError):
    """Iterative numerical routine did not converge."""
