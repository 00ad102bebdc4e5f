"""Exception types raised by the library.

Argument validation failures raise plain ``ValueError``; the classes below
flag numerical or physical conditions callers may want to catch on purpose.
"""


class NotASymmetryError(ValueError):
    """No charge assignment commutes with the generator."""


class DegenerateSteadyStateError(RuntimeError):
    """The zero eigenvalue is not simple, so the steady state is not unique."""


class SolverFailure(RuntimeError):
    """An iterative eigensolver or factorization did not converge."""


class StiffnessError(RuntimeError):
    """Time integration stalled on a vanishing step size."""


class UnsupportedEmbeddingError(ValueError):
    """The correlation amplitudes cannot be realised by real pseudo-modes."""


class NotRealEigenvalueError(ValueError):
    """Phase reconstruction was asked for a visibly complex eigenvalue."""


class DivergenceError(RuntimeError):
    """A mean-field trajectory left any physically sensible region."""


class ConfigError(ValueError):
    """An experiment configuration is missing or misuses a field."""
