"""Exception types raised across the package."""

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class IllConditionedError(np.linalg.LinAlgError):
    """The measurement matrix is too close to singular for direct inversion."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class WidthUnresolvedError(ValueError):
    """A correlation profile never falls to half maximum inside the grid."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``key`` names the offending setting and ``lineno`` the source line, when known.
    """

    def __init__(self, message, key=None, lineno=None):
        super().__init__(message)
        self.key = key
        self.lineno = lineno
