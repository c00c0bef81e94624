"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class FlowDegeneracyError(RuntimeError):
    """A flowed foliation stopped being a family of graphs."""

    def __init__(self, message, leaf_label=None):
        super().__init__(message)
        self.leaf_label = leaf_label


class SingularityError(ArithmeticError):
    """A singular weight was hit (vanishing gradient with q < 2)."""


class UnsupportedExponentError(ValueError):
    """The exponent falls outside the range where a formula is valid."""


class NumericalError(ArithmeticError):
    """A quadrature or normalisation produced a non-finite or degenerate value."""
