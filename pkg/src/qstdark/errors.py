"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for validation failures, 3 for numerical failures, 4 for I/O failures.
"""


class QSTError(Exception):
    exit_code = 1


class ValidationError(QSTError, ValueError):
    exit_code = 2


class NumericalError(QSTError, ArithmeticError):
    exit_code = 3


class NotHermitian(ValidationError):
    pass


class NonSquare(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class DegenerateParams(NumericalError):
    """Cholesky parameters whose ``Tr(W^dagger W)`` vanishes."""


class OutOfRange(ValidationError):
    pass


class EmptyEnsemble(ValidationError):
    pass


class InvalidStateSpec(ValidationError):
    pass


class MalformedCounts(ValidationError):
    pass


class MalformedResults(ValidationError):
    pass


class MalformedReference(ValidationError):
    pass


class MalformedState(ValidationError):
    pass


class IoFailure(QSTError, OSError):
    exit_code = 4
