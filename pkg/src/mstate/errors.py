"""Shared exception types."""


class MstateError(Exception):
    """Base class for all package errors."""


class TickParseError(MstateError):
    """Malformed tick CSV row; message names the offending line number."""


class CalendarError(MstateError):
    """Session calendar is inconsistent (e.g. session not divisible by bar width)."""


class InsufficientDataError(MstateError):
    """Not enough usable observations for the requested computation."""


class DegenerateDataError(MstateError):
    """Input is degenerate (all-identical values, zero-norm period, empty matrix)."""


class ConfigError(MstateError):
    """Invalid pipeline configuration; `key` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


class MissingArtifactError(MstateError):
    """A pipeline stage input file is absent; `path` is where it was expected."""

    def __init__(self, path):
        super().__init__(f"missing input artifact: {path}")
        self.path = str(path)
