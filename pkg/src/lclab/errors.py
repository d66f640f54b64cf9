"""Exception types shared across the toolkit.

Numerical failures (truncation, divergence, non-convergence) are kept distinct
from plain input errors so callers (and the CLI exit-code mapping) can tell
"the computation cannot be trusted" apart from "the request was malformed".
"""


class LclabError(Exception):
    """Base class for all toolkit errors."""


class InputError(LclabError, ValueError):
    """Malformed or inconsistent user input (bad descriptor, bad dims, ...)."""


class NumericalError(LclabError):
    """Base class for failures of the numerics, not of the input schema."""


class TruncationError(NumericalError):
    """A grid's boundary carries non-negligible mass (tail criterion violated)."""


class DivergentTiltError(NumericalError):
    """The tilted integrand e^{-<x,z>} f(z) is not integrable on the given box."""


class DegenerateError(NumericalError):
    """The function's support is (numerically) lower-dimensional."""


class NonConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget.

    Carries the best iterate found so far in ``best`` (solver-specific payload).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SanityError(NumericalError):
    """A mathematically guaranteed bound failed beyond numerical slack."""
