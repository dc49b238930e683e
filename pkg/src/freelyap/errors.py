"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Argument outside the set where an operation is defined."""


class BoundaryError(DomainError):
    """Argument sits exactly on a boundary where the quantity is undefined."""


class PreconditionError(ValueError):
    """Input measure does not satisfy the hypothesis an operation needs."""


class HypothesisWarning(UserWarning):
    """Result computed outside the hypotheses of the underlying theorem."""
