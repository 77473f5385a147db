"""Exception types raised by mixedent."""


class InvalidInputError(ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidStateError(InvalidInputError):
    """A matrix failed density-matrix validation.

    ``violations`` lists every failed invariant with its measured magnitude.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations) or "invalid density matrix"
        super().__init__(msg)


class NumericError(ArithmeticError):
    """An iterative routine failed to converge."""
