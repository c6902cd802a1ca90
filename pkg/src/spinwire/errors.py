"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SpinwireError(Exception):
    """Base class for all errors raised by :mod:`spinwire`."""


class ConfigError(SpinwireError, ValueError):
    """Malformed input: network descriptions, options, array shapes."""


class NetworkError(ConfigError):
    """A network description violates the model's invariants."""


class NumericalInvariantError(SpinwireError, ArithmeticError):
    """A numerical invariant (Hermiticity, unitarity, reality, ...) was breached."""
