"""Exception hierarchy shared across the package."""


class McpoolError(Exception):
    """Base class for all package errors."""


class InvalidScoreError(McpoolError):
    """Raw scores contain a negative or non-finite entry."""


class InvalidParameterError(McpoolError):
    """A numeric parameter is outside its allowed range."""


class InvalidDistributionError(McpoolError):
    """A probability vector violates the distribution invariants."""


class DomainError(McpoolError):
    """Inputs are outside the mathematical domain of an operation."""


class ConfigurationError(McpoolError):
    """A rule/weight mismatch or an invalid module configuration."""


class ConsistencyError(McpoolError):
    """Two inputs that must describe the same data set do not agree."""


class ResourceError(McpoolError):
    """A lexical resource file is missing or malformed."""


class FormatError(McpoolError):
    """A data file does not conform to its documented format."""
