"""Exception types shared across the package."""


class BccdeError(Exception):
    """Base class for all package errors."""


class ConfigError(BccdeError):
    """Invalid configuration value or combination."""


class LlrContradictionError(BccdeError):
    """Two saturated LLRs of opposite sign were combined at a variable node."""


class DecodeContradictionError(BccdeError):
    """No codeword is consistent with the known bits handed to the decoder."""


class BracketError(BccdeError):
    """A threshold search bracket does not enclose the threshold."""


class BudgetError(BccdeError):
    """An evaluation budget ran out before the search reached its resolution."""
