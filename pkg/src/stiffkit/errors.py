"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalError` so the CLI can
map it to a single exit code; model/input problems derive from
:class:`InputError`.
"""


class StiffkitError(Exception):
    """Base class for all package errors."""


class InputError(StiffkitError, ValueError):
    """Malformed model, parameter or schema violation."""


class ModelValidationError(InputError):
    pass


class DegenerateGeometry(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NumericalError(StiffkitError, ArithmeticError):
    """A matrix needed by the computation is singular at the working tolerance."""


class SingularBlock(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class DeficientSprings(NumericalError):
    """rank(J_theta) < 6: the locked chain has no invertible stiffness."""


class RedundantPassiveJoint(NumericalError):
    """A passive direction is already free, so its pivot vanishes.

    ``column`` is the offending J_q column index when known.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


RedundantPassiveJoints = RedundantPassiveJoint
