"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists one message per violation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(ArithmeticError):
    """A numerical routine failed to produce a trustworthy value."""


class InfeasibleError(NumericalError):
    """The requested operating point has no solution (e.g. no charging range)."""
