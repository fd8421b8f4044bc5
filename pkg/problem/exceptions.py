"""
Exception hierarchy shared by every solver module.
"""


class BeamformingError(Exception):
    """Base class for all solver errors"""
    pass


class DimensionError(BeamformingError):
    """Array shapes do not agree with the problem instance"""
    pass


class ContractViolation(BeamformingError):
    """An operation was called outside its documented preconditions"""
    pass


class ConvergenceError(BeamformingError):
    """An iterative method hit its iteration cap"""

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class InfeasibleUserError(BeamformingError):
    """The beam nulls at least one user, so the max-min SNR is zero"""

    def __init__(self, message, users=()):
        super().__init__(message)
        self.users = tuple(users)


class ResourceLimitError(BeamformingError):
    """A configured node cap or memory guard was exceeded"""
    pass


class SearchSpaceTooLarge(BeamformingError):
    """An exhaustive oracle would enumerate more candidates than allowed"""
    pass
