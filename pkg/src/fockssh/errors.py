"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented status codes without inspecting types.
"""


class FockSSHError(Exception):
    exit_code = 3


class ConfigError(FockSSHError, ValueError):
    exit_code = 1


class NumericalGuardError(FockSSHError):
    """A guard on truncation, convergence or conditioning tripped."""

    exit_code = 2


class CutoffTooSmall(NumericalGuardError):
    pass


class EpUnresolvable(NumericalGuardError):
    pass


class EpProjectionUnsupported(NumericalGuardError):
    pass


class ReconstructionFailure(NumericalGuardError):
    pass


class IntegratorStall(NumericalGuardError):
    pass


class DegenerateState(NumericalGuardError):
    pass


class NotReached(NumericalGuardError):
    pass


class ZeroOverlap(NumericalGuardError):
    pass


class InvariantViolation(FockSSHError):
    exit_code = 3
