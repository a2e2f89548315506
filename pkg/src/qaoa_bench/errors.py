"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class QaoaBenchError(Exception):
    exit_code = 1


class InputError(QaoaBenchError, ValueError):
    exit_code = 2


class ConfigError(InputError):
    exit_code = 2


class CapacityError(QaoaBenchError):
    exit_code = 4


class DegenerateInstanceError(QaoaBenchError, ValueError):
    """Max-Cut value is zero, so the approximation ratio is undefined."""

    exit_code = 5


class EvaluationError(QaoaBenchError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

    exit_code = 6


class JournalError(QaoaBenchError):
    """Journal is corrupt before its final line.

    ``valid_records`` holds the salvageable prefix.
    """

    exit_code = 3

    def __init__(self, message, valid_records=(), line_number=None):
        super().__init__(message)
        self.valid_records = list(valid_records)
        self.line_number = line_number


class StorageError(QaoaBenchError, OSError):
    exit_code = 3
