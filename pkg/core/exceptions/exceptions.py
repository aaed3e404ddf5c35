class MetroError(Exception):
    """Base class for every error raised by metro."""


class ModelError(MetroError, ValueError):
    """Invalid input or violated precondition of a statistical model."""


class NumericalError(MetroError, ArithmeticError):
    """Truncation, quadrature or convergence failure."""


class EstimationError(NumericalError):
    """The maximum-likelihood estimator could not produce an interior estimate."""
