"""Shared error types.

DomainError marks arguments outside a function's mathematical domain;
ResourceLimitError marks a computation that refuses to run past a configured
ceiling. The command line maps them to exit codes 3 and 4.
"""


class DomainError(ValueError):
    """Arguments lie outside the mathematical domain of the operation."""


class ResourceLimitError(RuntimeError):
    """The computation would exceed a configured resource ceiling."""
