"""
errors.py - This module defines the exceptions raised by clmm.
"""

class ClmmError(Exception):
    """
    This class is the parent class for all clmm errors.
    The command line driver reports any ClmmError as a single line.
    """
    kind = "ClmmError"


class DimensionError(ClmmError, ValueError):
    """
    Array shapes do not agree.
    """
    kind = "DimensionError"


class ConfigError(ClmmError, ValueError):
    """
    A configuration value is missing, unknown, or out of range.
    """
    kind = "ConfigError"


class ContractError(ClmmError, RuntimeError):
    """
    A precondition of an operation does not hold.
    """
    kind = "ContractError"


class IntegrityError(ClmmError, IOError):
    """
    A checkpoint is corrupted or is not a clmm checkpoint.
    """
    kind = "IntegrityError"


class LoadError(ClmmError, IOError):
    """
    A dataset file could not be read.
    """
    kind = "LoadError"
