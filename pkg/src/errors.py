"""
Exceptions raised by the toolkit.

Library code raises these; the command-line layer turns them into exit codes
(see src/main.py).
"""


class ToolkitError(Exception):
    """Base class for every error the toolkit raises on purpose."""

    exit_code = 2


class ValidationError(ToolkitError, ValueError):
    """An argument or precondition is out of range."""


class DatasetFormatError(ToolkitError):
    """
    A data file could not be parsed.

    Args:
        message (str): What went wrong
        path (str, optional): File being parsed
        line_number (int, optional): 1-based line number of the offending line
    """

    def __init__(self, message, path=None, line_number=None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        elif line_number is not None:
            location = f"line {line_number}: "
        super().__init__(f"{location}{message}")


class DimensionMismatchError(ToolkitError):
    """Feature or label dimensions of two artifacts do not agree."""


class ConvergenceError(ToolkitError):
    """The binary solver did not reach its stopping certificate."""


class GroundTruthGateError(ToolkitError):
    """The unrealistic strategy was requested without allowing ground truth."""


class ConfigError(ToolkitError):
    """The experiment configuration is incomplete or inconsistent."""


class VerificationError(ToolkitError):
    """A theorem check or report assertion failed."""

    exit_code = 1

    def __init__(self, message, counterexample=None):
        self.counterexample = counterexample
        super().__init__(message)
