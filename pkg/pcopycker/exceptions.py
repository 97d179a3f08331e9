"""
Exceptions and warnings raised by PcoPycker
"""


__author__ = "PcoPycker developers"


class PcoPyckerError(Exception):
    """
    Base class of every error raised by this package
    """


class InvalidArgument(PcoPyckerError, ValueError):
    """
    Exception thrown when an argument violates the precondition of an operation
    """


class ConfigurationError(InvalidArgument):
    """
    Exception thrown when a run configuration cannot be validated
    """


class DataFormatError(InvalidArgument):
    """
    Exception thrown when an input file cannot be turned into a sample

    :param message: description of the problem
    :param row: 1-based line number of the offending row, if any
    """
    def __init__(self, message: str, row: int = None):
        if row is not None:
            message = "row {}: {}".format(row, message)
        super().__init__(message)
        self.row = row


class UnsupportedOperation(PcoPyckerError, NotImplementedError):
    """
    Exception thrown when an operation is asked for a setting it does not cover
    """


class CoverageError(PcoPyckerError):
    """
    Exception thrown when an evaluation grid misses a relevant part of a density's mass
    """


class CalibrationFailed(PcoPyckerError):
    """
    Exception thrown when no minimal penalty transition could be found

    :param message: description of the failure
    :param trace: the calibration trace that exhibited no transition
    """
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class WorkerError(PcoPyckerError):
    """
    Exception thrown when a task failed inside a worker process

    :param message: description of the failure
    :param remote_traceback: formatted traceback captured in the worker
    """
    def __init__(self, message: str, remote_traceback: str = ""):
        super().__init__(message)
        self.remote_traceback = remote_traceback

    def __str__(self):
        if self.remote_traceback:
            return "{}\n\nRemote traceback:\n{}".format(super().__str__(), self.remote_traceback)
        return super().__str__()


class AdmissibilityWarning(UserWarning):
    """
    Warning raised when a bandwidth grid goes below the smallest admissible volume ‖K‖∞‖K‖₁/n
    """


class OrderingWarning(UserWarning):
    """
    Warning raised when an estimator is compared to a reference that is not coordinatewise smaller
    """


class QuadratureWarning(UserWarning):
    """
    Warning raised when an adaptive quadrature stops before reaching its tolerance
    """


class SerializationWarning(UserWarning):
    """
    Warning to be raised when a solveable problem appeared while serializing a worker result
    """
