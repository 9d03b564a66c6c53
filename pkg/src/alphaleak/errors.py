"""Semantic exception hierarchy shared by all modules."""


class AlphaleakError(Exception):
    """Base class for all library errors."""


class ValidationError(AlphaleakError):
    """Input violates a structural constraint (simplex, row-stochasticity,
    alphabet mismatch, out-of-range parameter)."""


class ConvergenceError(AlphaleakError):
    """An iterative solver failed to reach its certificate tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IncompatibleGeneratorError(AlphaleakError):
    """The requested f-divergence has f(0) = +inf, which no mechanism with
    forced zero entries (hard distortion) can support."""
