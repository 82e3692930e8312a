"""Exception hierarchy shared by the pipeline stages.

Exit-code mapping lives in the CLI: ConfigError -> 1, DataError -> 2,
ProtocolError -> 3.
"""


class InkError(Exception):
    """Base class for all toolchain errors."""


class ConfigError(InkError):
    """Bad invocation: missing roots, empty profile lists, unknown flags."""


class DataError(InkError):
    """Malformed or missing artifact content."""


class ProtocolError(InkError):
    """A predictor endpoint violated the wire protocol."""
