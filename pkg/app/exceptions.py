"""
Exceptions
Error hierarchy shared by the numerical core, the repositories and the CLI
"""


class DmfcError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1

    def to_dict(self):
        return {'error': type(self).__name__, 'message': str(self)}


class DataError(DmfcError, ValueError):
    """Invalid, missing or corrupt input data"""

    exit_code = 3


class CorrespondenceError(DataError):
    """Inputs are not in correspondence with the reference"""


class OutOfDomainError(DataError):
    """Query point lies outside the admissible domain expansion"""


class NumericalError(DmfcError, ArithmeticError):
    """A numerical procedure failed or is undefined for its input"""

    exit_code = 4


class DegenerateAlignmentError(NumericalError):
    """Point configuration is collinear or otherwise rank deficient"""


class UndefinedCorrelationError(NumericalError):
    """Correlation requested for a constant vector"""
