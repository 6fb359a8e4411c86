"""Exception hierarchy for the quantile bench.

Library code raises these; only app.py turns them into messages and exit codes.
"""


class QuantileBenchError(Exception):
    """Base class for every error raised by the bench."""

    category = "Bench"
    exit_code = 1


class DomainError(QuantileBenchError, ValueError):
    """Invalid mathematical input (empty counts, bad merge index, q outside (0, 1])."""

    category = "Domain"
    exit_code = 5


class RangeError(DomainError):
    """A CDF was evaluated outside the histogram's support."""

    category = "Range"

    def __init__(self, message, side):
        super().__init__(message)
        self.side = side


class NotWarmedUpError(QuantileBenchError):
    """The estimator has not seen enough data to answer a query."""

    category = "Warm-up"
    exit_code = 5

    def __init__(self, needed, message=None):
        super().__init__(message or f"estimator needs {needed} more observation(s)")
        self.needed = needed


class DatumError(QuantileBenchError, ValueError):
    """A non-finite datum was offered to an estimator. State is left unchanged."""

    category = "Datum"
    exit_code = 3


class ConfigError(QuantileBenchError, ValueError):
    category = "Config"
    exit_code = 2

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class IngestError(QuantileBenchError):
    category = "Input"
    exit_code = 3

    def __init__(self, message, path=None, line=None):
        if line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class OutputError(QuantileBenchError):
    category = "Output"
    exit_code = 4

    def __init__(self, message, path=None):
        super().__init__(f"{path}: {message}" if path is not None else message)
        self.path = path
