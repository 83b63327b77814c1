"""Exception types shared across the package.

Every numerical operation that can refuse its input raises
:class:`RejectionError`; configuration parsing raises
:class:`ConfigError`.  The command-line front end maps these onto
distinct exit codes.
"""


class WignerFlowError(Exception):
    """Base class for all package errors."""


class ConfigError(WignerFlowError, ValueError):
    """A run configuration failed validation before any computation."""


class RejectionError(WignerFlowError, ValueError):
    """An operation rejected its input on numerical or contract grounds."""
