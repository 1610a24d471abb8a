"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SingularityError(ArithmeticError):
    """A denominator or matrix needed by an update is numerically singular."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


class HarnessError(RuntimeError):
    """Every Monte Carlo trial of a method failed."""
