from __future__ import annotations


class QPurifyError(Exception):
    """Base class for every error raised by qpurify."""


class DomainError(QPurifyError, ValueError):
    pass


class CapacityError(QPurifyError, ValueError):
    pass


class ConfigError(QPurifyError, ValueError):
    pass


class EnsembleExhaustedError(QPurifyError, RuntimeError):
    pass


class UnreachableBranchError(QPurifyError, RuntimeError):
    pass


class DegeneratePosteriorError(QPurifyError, RuntimeError):
    pass
